#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "bab/channel.hpp"

using namespace bab;
using namespace bab::channel;

namespace {

// Free-space loss written out from the Friis form, independent of air_loss().
double friis_db(double d, double f) {
    const double lambda = 3.0e8 / f;
    const double ratio = lambda / (4.0 * 3.14159265358979323846 * d);
    return -20.0 * std::log10(ratio);
}

MediumMap slab() {
    MediumMap m;
    m.blocks.push_back({{-0.2, -0.2, 0.9}, {0.2, 0.2, 1.0}, 55.0});
    return m;
}

}  // namespace

TEST_CASE("air loss matches the published table ends") {
    CHECK(std::abs(air_loss(1.0) - 31.67) < 0.005);
    CHECK(std::abs(air_loss(10.0) - 51.67) < 0.005);
    CHECK(std::abs(air_loss(2.0) - (air_loss(1.0) + 20.0 * std::log10(2.0))) < 1e-12);
}

TEST_CASE("air loss agrees with an independent Friis evaluation") {
    for (double d : {0.1, 0.5, 1.0, 3.3, 17.0})
        for (double f : {433e6, 915e6, 2.4e9}) CHECK(air_loss(d, f) == doctest::Approx(friis_db(d, f)).epsilon(1e-12));
}

TEST_CASE("air loss rejects non-positive distance or frequency") {
    CHECK_THROWS_AS(air_loss(0.0), std::domain_error);
    CHECK_THROWS_AS(air_loss(-1.0), std::domain_error);
    CHECK_THROWS_AS(air_loss(1.0, 0.0), std::domain_error);
}

TEST_CASE("muscle loss anchors and midpoint") {
    CHECK(muscle_loss(0.02) == doctest::Approx(9.2));
    CHECK(muscle_loss(0.06) == doctest::Approx(27.6));
    CHECK(muscle_loss(0.04) == doctest::Approx(18.4));
    CHECK(muscle_loss(0.0) == 0.0);
    CHECK_THROWS_AS(muscle_loss(-0.01), std::domain_error);
}

TEST_CASE("round-trip budgets reproduce the table totals") {
    const std::vector<MediumSegment> best = {air(1.0),       skin_in(),  muscle(0.02), insertion(),
                                             muscle(0.02), skin_out(), air(1.0)};
    const std::vector<MediumSegment> worst = {air(10.0),      skin_in(),  muscle(0.06), insertion(),
                                              muscle(0.06), skin_out(), air(10.0)};
    CHECK(std::abs(30.0 - compose_budget(best).total_loss_db - (-89.74)) < 0.01);
    CHECK(std::abs(30.0 - compose_budget(worst).total_loss_db - (-166.54)) < 0.01);
    const std::vector<MediumSegment> one_way = {air(1.0)};
    CHECK(std::abs(30.0 - compose_budget(one_way).total_loss_db - (-1.67)) < 0.01);
}

TEST_CASE("boundary costs do not depend on length") {
    MediumSegment s = skin_in();
    s.length_m = 0.3;
    CHECK(segment_loss(s) == kSkinInboundDb);
    MediumSegment o = skin_out();
    CHECK(segment_loss(o) == kSkinOutboundDb);
    MediumSegment ins = insertion();
    ins.length_m = 5.0;
    CHECK(segment_loss(ins) == kInsertionDb);
}

TEST_CASE("compose_budget validates its input") {
    CHECK_THROWS_AS(compose_budget(std::vector<MediumSegment>{}), std::domain_error);
    CHECK_THROWS_AS(compose_budget(std::vector<MediumSegment>{muscle(-0.1)}), std::domain_error);
    CHECK_THROWS_AS(compose_budget(std::vector<MediumSegment>{air(0.0)}), std::domain_error);
}

TEST_CASE("property: total loss is the sum of segment losses and never beats free space") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> len(0.05, 12.0), depth(0.0, 0.08);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<MediumSegment> segs = {air(len(rng))};
        double geometric = segs[0].length_m;
        if (trial % 2 == 0) {
            segs.push_back(skin_in());
            segs.push_back(muscle(depth(rng)));
            segs.push_back(skin_out());
            geometric += segs[2].length_m;
        }
        double sum = 0.0;
        for (const auto& s : segs) sum += segment_loss(s);
        const auto b = compose_budget(segs);
        CHECK(b.total_loss_db == doctest::Approx(sum).epsilon(1e-12));
        CHECK(b.total_loss_db >= air_loss(geometric) - 1e-9);
        CHECK(b.path_length_m == doctest::Approx(geometric));
    }
}

TEST_CASE("phase uses the electrical length") {
    const std::vector<MediumSegment> segs = {air(1.3), skin_in(), muscle(0.03)};
    const double n = std::sqrt(55.0);
    const auto b = compose_budget(segs, kCarrierHz, n);
    const double lambda = 3.0e8 / kCarrierHz;
    const double expected = std::fmod(2.0 * kPi * (1.3 + n * 0.03) / lambda, 2.0 * kPi);
    CHECK(b.electrical_length_m == doctest::Approx(1.3 + n * 0.03));
    CHECK(b.phase == doctest::Approx(expected).epsilon(1e-9));
    CHECK(b.phase >= 0.0);
    CHECK(b.phase < kTwoPi);
}

TEST_CASE("mirror reverses order and swaps skin direction; twice is identity") {
    const std::vector<MediumSegment> segs = {air(1.0), skin_in(), muscle(0.02), insertion()};
    const auto m = mirror(segs);
    REQUIRE(m.size() == 4);
    CHECK(m[0].kind == SegmentKind::Insertion);
    CHECK(m[2].kind == SegmentKind::SkinBoundary);
    CHECK(m[2].direction == Direction::Outbound);
    CHECK(m[3].kind == SegmentKind::Air);
    const auto mm = mirror(m);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        CHECK(mm[i].kind == segs[i].kind);
        CHECK(mm[i].direction == segs[i].direction);
        CHECK(mm[i].length_m == segs[i].length_m);
    }
    // Outbound skin costs 2 dB more than inbound.
    CHECK(compose_budget(m).total_loss_db - compose_budget(segs).total_loss_db == doctest::Approx(2.0));
}

TEST_CASE("trace_path through air only is one air segment") {
    const auto segs = trace_path({0, 0, 0}, {3, 4, 0}, MediumMap{});
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].kind == SegmentKind::Air);
    CHECK(segs[0].length_m == doctest::Approx(5.0));
}

TEST_CASE("buried receiver straight below the transmitter: normal incidence") {
    const auto m = slab();
    const Position tx{0.0, 0.0, 3.0}, rx{0.0, 0.0, 0.98};
    const auto segs = trace_path(tx, rx, m);
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].kind == SegmentKind::Air);
    CHECK(segs[0].length_m == doctest::Approx(2.0));
    CHECK(segs[1].kind == SegmentKind::SkinBoundary);
    CHECK(segs[1].direction == Direction::Inbound);
    CHECK(segs[2].kind == SegmentKind::Muscle);
    CHECK(segs[2].length_m == doctest::Approx(0.02));
}

TEST_CASE("tissue vs air gain ratio equals the composed tissue losses") {
    const auto m = slab();
    ChannelConfig cfg;
    cfg.random_phase_offset = false;
    const Position tx{0.0, 0.0, 3.0};
    const double depth = 0.05;
    const auto in_tissue = channel::channel(tx, {0.0, 0.0, 1.0 - depth}, m, cfg, 0);
    const auto in_air = channel::channel(tx, {0.0, 0.0, 1.0 - depth}, MediumMap{}, cfg, 0);
    const double ratio_db = 20.0 * std::log10(in_air.gain / in_tissue.gain);
    const double d_total = 2.0 + depth;
    const double expected = friis_db(2.0, kCarrierHz) + 3.0 + 460.0 * depth - friis_db(d_total, kCarrierHz);
    CHECK(ratio_db == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("oblique entry refracts toward the normal; muscle length is depth / cos(theta_t)") {
    const auto m = slab();
    const Position tx{2.0, 0.0, 1.5}, rx{0.0, 0.0, 0.97};
    const auto segs = trace_path(tx, rx, m);
    double muscle_m = 0.0;
    for (const auto& s : segs)
        if (s.kind == SegmentKind::Muscle) muscle_m += s.length_m;
    // Independent Snell computation for the top face.
    const double horiz = 2.0, vert = 1.5 - 0.97;
    const double sin_i = horiz / std::hypot(horiz, vert);
    const double sin_t = sin_i / std::sqrt(55.0);
    const double cos_t = std::sqrt(1.0 - sin_t * sin_t);
    CHECK(muscle_m == doctest::Approx(0.03 / cos_t).epsilon(1e-9));
    CHECK(muscle_m < 0.0305);
}

TEST_CASE("channel gain, phase range and per-link offset stability") {
    ChannelConfig cfg;
    cfg.seed = 42;
    const auto m = slab();
    const auto a = channel::channel({3, 0, 2}, {0, 0, 0.98}, m, cfg, 7);
    const auto b = channel::channel({3, 0, 2}, {0, 0, 0.98}, m, cfg, 7);
    CHECK(a.gain == b.gain);
    CHECK(a.phase == b.phase);
    CHECK(a.gain > 0.0);
    CHECK(a.gain <= 1.0);
    CHECK(a.phase >= 0.0);
    CHECK(a.phase < kTwoPi);
    // Moving the receiver keeps the static per-link offset.
    cfg.random_phase_offset = false;
    const auto p0 = channel::channel({3, 0, 2}, {0, 0, 0.98}, m, cfg, 7).phase;
    cfg.random_phase_offset = true;
    const double off = link_phase_offset(cfg, 7);
    CHECK(std::abs(std::remainder(a.phase - p0 - off, kTwoPi)) < 1e-9);
    CHECK(link_phase_offset(cfg, 7) != link_phase_offset(cfg, 8));
    const auto budget = path_budget({3, 0, 2}, {0, 0, 0.98}, m);
    CHECK(a.gain == doctest::Approx(std::pow(10.0, (-budget.total_loss_db + 4.0) / 20.0)));
}

TEST_CASE("coincident endpoints are rejected") {
    CHECK_THROWS_AS(channel::channel({1, 1, 1}, {1, 1, 1}, MediumMap{}, ChannelConfig{}, 0), std::domain_error);
}

TEST_CASE("rayleigh option perturbs gain deterministically") {
    ChannelConfig cfg;
    cfg.rayleigh = true;
    const auto a = channel::channel({3, 0, 2}, {0, 0, 1.5}, MediumMap{}, cfg, 1);
    const auto b = channel::channel({3, 0, 2}, {0, 0, 1.5}, MediumMap{}, cfg, 1);
    cfg.rayleigh = false;
    const auto c = channel::channel({3, 0, 2}, {0, 0, 1.5}, MediumMap{}, cfg, 1);
    CHECK(a.gain == b.gain);
    CHECK(a.gain != c.gain);
}
