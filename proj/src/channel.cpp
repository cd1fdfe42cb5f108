#include "bab/channel.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace bab::channel {

MediumSegment air(double length_m) { return {SegmentKind::Air, length_m, Direction::Inbound}; }
MediumSegment muscle(double length_m) { return {SegmentKind::Muscle, length_m, Direction::Inbound}; }
MediumSegment skin_in() { return {SegmentKind::SkinBoundary, 0.0, Direction::Inbound}; }
MediumSegment skin_out() { return {SegmentKind::SkinBoundary, 0.0, Direction::Outbound}; }
MediumSegment insertion() { return {SegmentKind::Insertion, 0.0, Direction::Inbound}; }

double air_loss(double d_m, double f_hz) {
    if (!(d_m > 0.0) || !(f_hz > 0.0))
        throw std::domain_error("air_loss: distance and frequency must be positive");
    return 20.0 * std::log10(4.0 * kPi * d_m * f_hz / kSpeedOfLight);
}

double muscle_loss(double d_m) {
    if (!(d_m >= 0.0)) throw std::domain_error("muscle_loss: negative tissue length");
    return kMuscleDbPerMeter * d_m;
}

double segment_loss(const MediumSegment& s, double f_hz) {
    if (!(s.length_m >= 0.0) || !std::isfinite(s.length_m))
        throw std::domain_error("segment length must be finite and non-negative");
    switch (s.kind) {
        case SegmentKind::Air:
            return air_loss(s.length_m, f_hz);
        case SegmentKind::Muscle:
            return muscle_loss(s.length_m);
        case SegmentKind::SkinBoundary:
            return s.direction == Direction::Inbound ? kSkinInboundDb : kSkinOutboundDb;
        case SegmentKind::Insertion:
            return kInsertionDb;
    }
    return 0.0;
}

LinkBudget compose_budget(std::span<const MediumSegment> segments, double f_hz, double muscle_index) {
    if (segments.empty()) throw std::domain_error("compose_budget: empty segment list");
    LinkBudget b;
    b.segments.assign(segments.begin(), segments.end());
    for (const auto& s : segments) {
        b.total_loss_db += segment_loss(s, f_hz);
        if (s.kind == SegmentKind::Air) {
            b.path_length_m += s.length_m;
            b.electrical_length_m += s.length_m;
        } else if (s.kind == SegmentKind::Muscle) {
            b.path_length_m += s.length_m;
            b.electrical_length_m += muscle_index * s.length_m;
        }
    }
    const double lambda = kSpeedOfLight / f_hz;
    b.phase = wrap_phase(kTwoPi * std::fmod(b.electrical_length_m / lambda, 1.0));
    return b;
}

std::vector<MediumSegment> mirror(std::span<const MediumSegment> segments) {
    std::vector<MediumSegment> out(segments.rbegin(), segments.rend());
    for (auto& s : out) {
        if (s.kind == SegmentKind::SkinBoundary)
            s.direction = s.direction == Direction::Inbound ? Direction::Outbound : Direction::Inbound;
    }
    return out;
}

bool TissueBlock::contains(Position p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
}

double TissueBlock::refractive_index() const { return std::sqrt(permittivity); }

namespace {

double coord(Position p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

struct Crossing {
    double t0 = 0.0, t1 = 0.0;
    bool enters = false;  // path starts outside the block
    bool leaves = false;  // path ends outside the block
    double muscle_m = 0.0;
    double straight_m = 0.0;
    double index = 1.0;
};

bool intersect(const TissueBlock& blk, Position a, Position b, Crossing& c) {
    const Position d = b - a;
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    int enter_axis = -1;
    for (int k = 0; k < 3; ++k) {
        const double o = coord(a, k), dk = coord(d, k);
        const double lo = coord(blk.lo, k), hi = coord(blk.hi, k);
        if (dk == 0.0) {
            if (o < lo || o > hi) return false;
            continue;
        }
        double ta = (lo - o) / dk, tb = (hi - o) / dk;
        if (ta > tb) std::swap(ta, tb);
        if (ta > t_enter) { t_enter = ta; enter_axis = k; }
        if (tb < t_exit) t_exit = tb;
    }
    const double t0 = std::max(t_enter, 0.0), t1 = std::min(t_exit, 1.0);
    if (!(t1 > t0)) return false;

    const double len = norm(d);
    c.t0 = t0;
    c.t1 = t1;
    c.enters = t_enter > 0.0;
    c.leaves = t_exit < 1.0;
    c.index = blk.refractive_index();
    c.straight_m = (t1 - t0) * len;

    auto refracted = [&](int axis, double depth) {
        const double cos_i = std::abs(coord(d, axis)) / len;
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_i * cos_i)) / c.index;
        return depth / std::sqrt(std::max(0.0, 1.0 - sin_t * sin_t));
    };
    if (c.enters && c.leaves) {
        c.muscle_m = refracted(enter_axis, (t1 - t0) * std::abs(coord(d, enter_axis)));
        return true;
    }
    if (!c.enters && !c.leaves) {
        c.muscle_m = c.straight_m;
        return true;
    }

    // One end buried: the wave leaves through whichever face facing the outer end costs
    // the least tissue, not necessarily the face the straight line crosses.
    const Position in = c.enters ? b : a;
    const Position out = c.enters ? a : b;
    double best = std::numeric_limits<double>::infinity();
    Position exit_pt = in;
    for (int k = 0; k < 3; ++k) {
        for (int side = 0; side < 2; ++side) {
            const double plane = coord(side == 0 ? blk.lo : blk.hi, k);
            const bool facing = side == 0 ? coord(out, k) <= plane : coord(out, k) >= plane;
            if (!facing) continue;
            const double m = refracted(k, std::abs(coord(in, k) - plane));
            if (m < best) {
                best = m;
                exit_pt = in;
                (k == 0 ? exit_pt.x : (k == 1 ? exit_pt.y : exit_pt.z)) = plane;
            }
        }
    }
    c.muscle_m = best;
    // Straight-line share charged to this block, so that the air remainder is the
    // distance from the exit point to the outer end.
    c.straight_m = std::max(0.0, len - distance(exit_pt, out));
    return true;
}

}  // namespace

std::vector<MediumSegment> trace_path(Position tx, Position rx, const MediumMap& medium) {
    std::vector<Crossing> hits;
    for (const auto& blk : medium.blocks) {
        Crossing c;
        if (intersect(blk, tx, rx, c)) hits.push_back(c);
    }
    std::sort(hits.begin(), hits.end(), [](const Crossing& l, const Crossing& r) { return l.t0 < r.t0; });

    // Free-space loss depends on the total air distance, so all air pieces are merged
    // into one segment placed where the path first runs through air.
    double straight_tissue = 0.0;
    for (const auto& h : hits) straight_tissue += h.straight_m;
    const double air_len = std::max(0.0, distance(tx, rx) - straight_tissue);

    std::vector<MediumSegment> segs;
    bool air_placed = air_len <= 1e-12;
    auto place_air = [&] {
        if (!air_placed) {
            segs.push_back(air(air_len));
            air_placed = true;
        }
    };
    for (const auto& h : hits) {
        if (h.enters) {
            place_air();
            segs.push_back(skin_in());
        }
        segs.push_back(muscle(h.muscle_m));
        if (h.leaves) segs.push_back(skin_out());
    }
    place_air();
    return segs;
}

LinkBudget path_budget(Position tx, Position rx, const MediumMap& medium, double f_hz) {
    if (!finite(tx) || !finite(rx)) throw std::domain_error("channel: non-finite position");
    if (distance(tx, rx) <= 0.0) throw std::domain_error("channel: coincident tx and rx positions");
    auto segs = trace_path(tx, rx, medium);
    double index = 1.0;
    for (const auto& blk : medium.blocks) index = std::max(index, blk.refractive_index());
    return compose_budget(segs, f_hz, index);
}

double link_phase_offset(const ChannelConfig& cfg, std::uint64_t link_id) {
    if (!cfg.random_phase_offset) return 0.0;
    const std::uint64_t h = mix_seed(cfg.seed, link_id);
    return kTwoPi * static_cast<double>(h >> 11) * 0x1.0p-53;
}

ChannelCoeff channel(Position tx, Position rx, const MediumMap& medium, const ChannelConfig& cfg,
                     std::uint64_t link_id) {
    const LinkBudget b = path_budget(tx, rx, medium, cfg.frequency_hz);
    ChannelCoeff c;
    c.gain = db_to_amplitude(-b.total_loss_db + cfg.tx_gain_dbi);
    c.phase = wrap_phase(b.phase + link_phase_offset(cfg, link_id));
    if (cfg.rayleigh) {
        std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x5ca77e7ULL, link_id));
        std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
        const cplx scatter = cfg.rayleigh_scale * c.gain * cplx(n01(rng), n01(rng));
        const cplx v = c.value() + scatter;
        c.gain = std::abs(v);
        c.phase = wrap_phase(std::arg(v));
    }
    return c;
}

}  // namespace bab::channel
