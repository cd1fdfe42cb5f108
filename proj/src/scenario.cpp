#include "bab/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace bab {

using ojson = nlohmann::ordered_json;

std::vector<Position> SlaveLayout::generate() const {
    if (kind == "explicit") return positions;
    if (count < 0) throw std::domain_error("layout: negative slave count");
    std::vector<Position> out;
    const int n = count;
    if (kind == "ceiling_grid") {
        const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
        const int rows = std::max(1, (n + cols - 1) / cols);
        for (int i = 0; i < n; ++i) {
            const int r = i / cols, c = i % cols;
            const double fx = cols > 1 ? static_cast<double>(c) / (cols - 1) : 0.5;
            const double fy = rows > 1 ? static_cast<double>(r) / (rows - 1) : 0.5;
            out.push_back({center.x + (fx - 0.5) * extent_m, center.y + (fy - 0.5) * extent_m, height_m});
        }
    } else if (kind == "ring") {
        for (int i = 0; i < n; ++i) {
            const double a = kTwoPi * i / n;
            out.push_back({center.x + radius_m * std::cos(a), center.y + radius_m * std::sin(a), height_m});
        }
    } else if (kind == "linear") {
        const double b = deg_to_rad(bearing_deg);
        for (int i = 0; i < n; ++i) {
            const double off = (i - 0.5 * (n - 1)) * spacing_m;
            out.push_back({center.x + off * std::cos(b), center.y + off * std::sin(b), height_m});
        }
    } else {
        throw std::domain_error("layout: unknown kind '" + kind + "'");
    }
    return out;
}

std::vector<TrajectoryPoint> Mobility::trajectory() const {
    std::vector<TrajectoryPoint> out;
    if (waypoints.empty()) return out;
    if (waypoints.size() == 1 || speed_mps <= 0.0) {
        out.push_back({0.0, waypoints.front(), 0.0});
        out.push_back({std::max(duration_s, 1e-9), waypoints.front(), 0.0});
        return out;
    }
    // Ping-pong over the polyline until the duration is covered.
    std::vector<Position> cycle = waypoints;
    for (std::size_t k = waypoints.size() - 2; k >= 1; --k) cycle.push_back(waypoints[k]);
    double loop_len = 0.0;
    for (std::size_t k = 0; k < cycle.size(); ++k) loop_len += distance(cycle[k], cycle[(k + 1) % cycle.size()]);
    out.push_back({0.0, cycle.front(), speed_mps});
    if (loop_len <= 0.0) {
        out.push_back({std::max(duration_s, 1e-9), cycle.front(), 0.0});
        return out;
    }
    double t = 0.0;
    for (std::size_t i = 1; t < duration_s; ++i) {
        const Position b = cycle[i % cycle.size()];
        const double d = distance(out.back().position, b);
        if (d > 0.0) {
            t += d / speed_mps;
            out.push_back({t, b, speed_mps});
        }
    }
    return out;
}

void Scenario::apply_layout() { slaves = layout.generate(); }

void Scenario::validate() const {
    if (slaves.empty()) throw std::domain_error("scenario: at least one slave is required");
    for (const auto& p : slaves)
        if (!finite(p)) throw std::domain_error("scenario: non-finite slave position");
    if (!finite(leader) || !finite(node.position)) throw std::domain_error("scenario: non-finite leader/node position");
    chirp.validate();
    node.validate(chirp);
    cold_start.config.validate();
    if (alignment.rounds < 1) throw std::domain_error("scenario: alignment.rounds must be >= 1");
    if (alignment.metrics_window < 1) throw std::domain_error("scenario: metrics window must be >= 1");
    if (radio.symbols_per_measurement < 1) throw std::domain_error("scenario: symbols_per_measurement must be >= 1");
    if (!(radio.detection_pfa > 0.0 && radio.detection_pfa < 1.0))
        throw std::domain_error("scenario: detection_pfa must be in (0, 1)");
    if (mobility.enabled) {
        if (mobility.waypoints.empty()) throw std::domain_error("scenario: mobility needs waypoints");
        if (!(mobility.duration_s > 0.0)) throw std::domain_error("scenario: mobility duration must be positive");
        if (!(mobility.speed_mps >= 0.0)) throw std::domain_error("scenario: negative speed");
        const auto tr = mobility.trajectory();
        for (std::size_t i = 1; i < tr.size(); ++i)
            if (!(tr[i].time_s > tr[i - 1].time_s))
                throw std::domain_error("scenario: trajectory times must be strictly increasing");
    }
}

channel::TissueBlock tissue_slab(Position c, double width_m, double thickness_m) {
    const double h = 0.5 * width_m;
    return {{c.x - h, c.y - h, c.z - thickness_m}, {c.x + h, c.y + h, c.z}, 55.0};
}

// ---------------------------------------------------------------- JSON reading

namespace {

std::string describe(const ojson& v) {
    switch (v.type()) {
        case ojson::value_t::null: return "null";
        case ojson::value_t::boolean: return "boolean";
        case ojson::value_t::string: return "string";
        case ojson::value_t::array: return "array";
        case ojson::value_t::object: return "object";
        default: return "number";
    }
}

class Obj {
public:
    Obj(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object, got " + describe(j_));
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError("config field '" + field(key) + "': " + msg);
    }

    std::string field(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const ojson& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double num(const std::string& key, double def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(key, "expected a number, got " + describe(v));
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }

    long long integer(const std::string& key, long long def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) fail(key, "expected an integer, got " + describe(v));
        return v.get<long long>();
    }

    std::uint64_t seed(const std::string& key, std::uint64_t def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail(key, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) fail(key, "expected true or false, got " + describe(v));
        return v.get<bool>();
    }

    std::string str(const std::string& key, const std::string& def, std::initializer_list<const char*> allowed = {}) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_string()) fail(key, "expected a string, got " + describe(v));
        std::string s = v.get<std::string>();
        if (allowed.size() > 0) {
            std::string opts;
            for (const char* a : allowed) {
                if (s == a) return s;
                opts += opts.empty() ? a : std::string(", ") + a;
            }
            fail(key, "unknown value '" + s + "' (expected one of: " + opts + ")");
        }
        return s;
    }

    Position pos(const std::string& key, Position def) {
        if (!has(key)) return def;
        return to_pos(j_.at(key), key);
    }

    Position to_pos(const ojson& v, const std::string& key) const {
        if (!v.is_array() || v.size() != 3) fail(key, "expected [x, y, z] in meters");
        Position p;
        double* dst[3] = {&p.x, &p.y, &p.z};
        for (int i = 0; i < 3; ++i) {
            if (!v[i].is_number()) fail(key, "coordinate " + std::to_string(i) + " is not a number");
            *dst[i] = v[i].get<double>();
        }
        if (!finite(p)) fail(key, "coordinates must be finite");
        return p;
    }

    std::vector<Position> positions(const std::string& key) {
        std::vector<Position> out;
        if (!has(key)) return out;
        const auto& v = j_.at(key);
        if (!v.is_array()) fail(key, "expected a list of [x, y, z]");
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_pos(v[i], key + "[" + std::to_string(i) + "]"));
        return out;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_array()) fail(key, "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::optional<Obj> child(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return Obj(j_.at(key), field(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }

    const std::string& path() const { return path_; }

private:
    const ojson& j_;
    std::string path_;
    std::set<std::string> seen_;
};

ojson pos_json(Position p) { return ojson::array({p.x, p.y, p.z}); }

ojson positions_json(const std::vector<Position>& ps) {
    ojson a = ojson::array();
    for (const auto& p : ps) a.push_back(pos_json(p));
    return a;
}

const char* mode_name(beamform::BoundMode m) { return m == beamform::BoundMode::Fixed ? "fixed" : "schedule"; }

}  // namespace

Scenario parse_scenario(const std::string& text) {
    ojson root;
    try {
        root = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        const auto p = what.find("parse error");
        if (p != std::string::npos) what = what.substr(p);
        throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + what);
    }

    Scenario s;
    Obj r(root, "");
    s.name = r.str("name", s.name);
    s.seed = r.seed("seed", s.seed);
    r.has("sweep");  // consumed by the command-line front end

    if (auto o = r.child("slaves")) {
        auto& L = s.layout;
        L.kind = o->str("layout", L.kind, {"ceiling_grid", "ring", "linear", "explicit"});
        L.count = static_cast<int>(o->integer("count", L.count));
        L.center = o->pos("center_m", L.center);
        L.extent_m = o->num("extent_m", L.extent_m);
        L.height_m = o->num("height_m", L.height_m);
        L.radius_m = o->num("radius_m", L.radius_m);
        L.spacing_m = o->num("spacing_m", L.spacing_m);
        L.bearing_deg = o->num("bearing_deg", L.bearing_deg);
        L.positions = o->positions("positions_m");
        if (L.kind == "explicit") {
            if (L.positions.empty()) o->fail("positions_m", "explicit layout needs at least one position");
            L.count = static_cast<int>(L.positions.size());
        }
        if (L.count < 1) o->fail("count", "must be >= 1");
        o->finish();
    }
    s.apply_layout();
    s.leader = r.pos("leader_m", s.leader);

    if (auto o = r.child("node")) {
        auto& n = s.node;
        n.position = o->pos("position_m", n.position);
        n.wake_threshold_dbm = o->num("wake_threshold_dbm", n.wake_threshold_dbm);
        n.shift_hz = o->num("shift_hz", n.shift_hz);
        n.dynamic_power_draw_w = o->num("power_draw_w", n.dynamic_power_draw_w);
        if (auto c = o->child("transfer_curve")) {
            n.curve.input_dbm = c->numbers("input_dbm", n.curve.input_dbm);
            n.curve.ratio_db = c->numbers("ratio_db", n.curve.ratio_db);
            c->finish();
            try {
                n.curve.validate();
            } catch (const std::domain_error& e) {
                c->fail("", e.what());
            }
        }
        o->finish();
    }

    if (r.has("tissue")) {
        const auto& arr = r.at("tissue");
        if (!arr.is_array()) r.fail("tissue", "expected a list of blocks");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Obj b(arr[i], "tissue[" + std::to_string(i) + "]");
            channel::TissueBlock blk;
            blk.lo = b.pos("lo_m", blk.lo);
            blk.hi = b.pos("hi_m", blk.hi);
            blk.permittivity = b.num("permittivity", blk.permittivity);
            if (!(blk.hi.x > blk.lo.x && blk.hi.y > blk.lo.y && blk.hi.z > blk.lo.z))
                b.fail("hi_m", "must exceed lo_m on every axis");
            if (!(blk.permittivity >= 1.0)) b.fail("permittivity", "must be >= 1");
            b.finish();
            s.medium.blocks.push_back(blk);
        }
    }

    if (auto o = r.child("chirp")) {
        auto& c = s.chirp;
        c.bandwidth_hz = o->num("bandwidth_hz", c.bandwidth_hz);
        c.symbol_time_s = o->num("symbol_time_s", c.symbol_time_s);
        c.sample_rate_hz = o->num("sample_rate_hz", c.sample_rate_hz);
        c.center_offset_hz = o->num("center_offset_hz", c.center_offset_hz);
        o->finish();
        try {
            c.validate();
        } catch (const std::domain_error& e) {
            o->fail("", e.what());
        }
    }

    if (auto o = r.child("radio")) {
        auto& d = s.radio;
        d.tx_power_dbm = o->num("tx_power_dbm", d.tx_power_dbm);
        d.tx_gain_dbi = o->num("tx_gain_dbi", d.tx_gain_dbi);
        d.noise_floor_dbm = o->num("noise_floor_dbm", d.noise_floor_dbm);
        d.rayleigh = o->boolean("rayleigh", d.rayleigh);
        d.rayleigh_scale = o->num("rayleigh_scale", d.rayleigh_scale);
        d.symbols_per_measurement = static_cast<int>(o->integer("symbols_per_measurement", d.symbols_per_measurement));
        d.feedback_latency_s = o->num("feedback_latency_s", d.feedback_latency_s);
        d.detection_pfa = o->num("detection_pfa", d.detection_pfa);
        d.noise_model = o->str("noise_model", "projected", {"projected", "waveform"}) == "waveform"
                            ? NoiseModel::Waveform
                            : NoiseModel::Projected;
        o->finish();
    }

    if (auto o = r.child("sync")) {
        auto& y = s.sync;
        y.enabled = o->boolean("enabled", y.enabled);
        y.max_offset_samples = o->num("max_offset_samples", y.max_offset_samples);
        y.config.preamble_snr_db = o->num("preamble_snr_db", y.config.preamble_snr_db);
        y.config.detect_peak_to_median = o->num("detect_peak_to_median", y.config.detect_peak_to_median);
        y.config.processing_delay_spread = o->num("delay_spread_samples", y.config.processing_delay_spread);
        y.config.envelope_symbols = static_cast<std::size_t>(o->integer("envelope_symbols", y.config.envelope_symbols));
        y.config.envelope_decimation =
            static_cast<std::size_t>(o->integer("envelope_decimation", y.config.envelope_decimation));
        y.config.leader_snr_db = o->num("leader_snr_db", y.config.leader_snr_db);
        o->finish();
    }

    if (auto o = r.child("cold_start")) {
        auto& c = s.cold_start;
        c.enabled = o->boolean("enabled", c.enabled);
        c.config.sigma_deg = o->num("sigma_deg", c.config.sigma_deg);
        c.config.cube_edge_m = o->num("cube_edge_m", c.config.cube_edge_m);
        c.config.voxel_m = o->num("voxel_m", c.config.voxel_m);
        c.config.max_perturbations = static_cast<int>(o->integer("max_perturbations", c.config.max_perturbations));
        c.config.wake_power_floor = o->num("wake_power_floor", c.config.wake_power_floor);
        o->finish();
        try {
            c.config.validate();
        } catch (const std::domain_error& e) {
            o->fail("", e.what());
        }
    }

    if (auto o = r.child("alignment")) {
        auto& a = s.alignment;
        a.rounds = static_cast<int>(o->integer("rounds", a.rounds));
        const std::string mode = o->str("bound", mode_name(a.config.mode), {"schedule", "fixed"});
        a.config.mode = mode == "fixed" ? beamform::BoundMode::Fixed : beamform::BoundMode::Schedule;
        a.config.fixed_phi_deg = o->num("fixed_phi_deg", a.config.fixed_phi_deg);
        a.config.dead_band = o->num("dead_band", a.config.dead_band);
        a.config.smoothing = o->boolean("smoothing", a.config.smoothing);
        a.config.kalman.process_rel = o->num("kalman_process_rel", a.config.kalman.process_rel);
        a.config.kalman.window = static_cast<std::size_t>(o->integer("kalman_window", a.config.kalman.window));
        a.config.forgetting = o->num("forgetting", a.config.forgetting);
        a.metrics_window = static_cast<int>(o->integer("metrics_window_rounds", a.metrics_window));
        a.config.convergence_window = static_cast<int>(o->integer("convergence_window_rounds", a.config.convergence_window));
        a.config.convergence_tol = o->num("convergence_tol", a.config.convergence_tol);
        if (a.rounds < 1) o->fail("rounds", "must be >= 1");
        o->finish();
    }

    if (auto o = r.child("mobility")) {
        auto& m = s.mobility;
        m.enabled = o->boolean("enabled", true);
        m.speed_mps = o->num("speed_mps", m.speed_mps);
        m.duration_s = o->num("duration_s", m.duration_s);
        m.waypoints = o->positions("waypoints_m");
        o->finish();
    }

    s.baseline = r.str("baseline", "none", {"none", "random_phase"}) == "random_phase" ? Baseline::RandomPhase
                                                                                       : Baseline::None;

    if (auto o = r.child("heatmap")) {
        auto& h = s.heatmap;
        h.enabled = o->boolean("enabled", true);
        h.center = o->pos("center_m", s.node.position);
        h.width_m = o->num("width_m", h.width_m);
        h.depth_m = o->num("depth_m", h.depth_m);
        h.voxel_m = o->num("voxel_m", h.voxel_m);
        o->finish();
    }
    r.finish();

    try {
        s.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("config invalid: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
    ojson j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    const auto& L = s.layout;
    ojson sl;
    sl["layout"] = L.kind;
    if (L.kind == "explicit") {
        sl["positions_m"] = positions_json(L.positions);
    } else {
        sl["count"] = L.count;
        sl["center_m"] = pos_json(L.center);
        sl["extent_m"] = L.extent_m;
        sl["height_m"] = L.height_m;
        sl["radius_m"] = L.radius_m;
        sl["spacing_m"] = L.spacing_m;
        sl["bearing_deg"] = L.bearing_deg;
    }
    j["slaves"] = sl;
    j["leader_m"] = pos_json(s.leader);
    j["node"] = {{"position_m", pos_json(s.node.position)},
                 {"wake_threshold_dbm", s.node.wake_threshold_dbm},
                 {"shift_hz", s.node.shift_hz},
                 {"power_draw_w", s.node.dynamic_power_draw_w},
                 {"transfer_curve", {{"input_dbm", s.node.curve.input_dbm}, {"ratio_db", s.node.curve.ratio_db}}}};
    ojson tissue = ojson::array();
    for (const auto& b : s.medium.blocks)
        tissue.push_back({{"lo_m", pos_json(b.lo)}, {"hi_m", pos_json(b.hi)}, {"permittivity", b.permittivity}});
    j["tissue"] = tissue;
    j["chirp"] = {{"bandwidth_hz", s.chirp.bandwidth_hz},
                  {"symbol_time_s", s.chirp.symbol_time_s},
                  {"sample_rate_hz", s.chirp.sample_rate_hz},
                  {"center_offset_hz", s.chirp.center_offset_hz}};
    j["radio"] = {{"tx_power_dbm", s.radio.tx_power_dbm},
                  {"tx_gain_dbi", s.radio.tx_gain_dbi},
                  {"noise_floor_dbm", s.radio.noise_floor_dbm},
                  {"rayleigh", s.radio.rayleigh},
                  {"rayleigh_scale", s.radio.rayleigh_scale},
                  {"symbols_per_measurement", s.radio.symbols_per_measurement},
                  {"feedback_latency_s", s.radio.feedback_latency_s},
                  {"detection_pfa", s.radio.detection_pfa},
                  {"noise_model", s.radio.noise_model == NoiseModel::Waveform ? "waveform" : "projected"}};
    const auto& y = s.sync;
    j["sync"] = {{"enabled", y.enabled},
                 {"max_offset_samples", y.max_offset_samples},
                 {"preamble_snr_db", y.config.preamble_snr_db},
                 {"detect_peak_to_median", y.config.detect_peak_to_median},
                 {"delay_spread_samples", y.config.processing_delay_spread},
                 {"envelope_symbols", y.config.envelope_symbols},
                 {"envelope_decimation", y.config.envelope_decimation},
                 {"leader_snr_db", y.config.leader_snr_db}};
    const auto& c = s.cold_start;
    j["cold_start"] = {{"enabled", c.enabled},
                       {"sigma_deg", c.config.sigma_deg},
                       {"cube_edge_m", c.config.cube_edge_m},
                       {"voxel_m", c.config.voxel_m},
                       {"max_perturbations", c.config.max_perturbations},
                       {"wake_power_floor", c.config.wake_power_floor}};
    const auto& a = s.alignment;
    j["alignment"] = {{"rounds", a.rounds},
                      {"bound", mode_name(a.config.mode)},
                      {"fixed_phi_deg", a.config.fixed_phi_deg},
                      {"dead_band", a.config.dead_band},
                      {"smoothing", a.config.smoothing},
                      {"kalman_process_rel", a.config.kalman.process_rel},
                      {"kalman_window", a.config.kalman.window},
                      {"forgetting", a.config.forgetting},
                      {"metrics_window_rounds", a.metrics_window},
                      {"convergence_window_rounds", a.config.convergence_window},
                      {"convergence_tol", a.config.convergence_tol}};
    if (s.mobility.enabled)
        j["mobility"] = {{"enabled", true},
                         {"speed_mps", s.mobility.speed_mps},
                         {"duration_s", s.mobility.duration_s},
                         {"waypoints_m", positions_json(s.mobility.waypoints)}};
    j["baseline"] = s.baseline == Baseline::RandomPhase ? "random_phase" : "none";
    if (s.heatmap.enabled)
        j["heatmap"] = {{"enabled", true},
                        {"center_m", pos_json(s.heatmap.center)},
                        {"width_m", s.heatmap.width_m},
                        {"depth_m", s.heatmap.depth_m},
                        {"voxel_m", s.heatmap.voxel_m}};
    return j.dump(2) + "\n";
}

bool same_scenario(const Scenario& a, const Scenario& b) {
    return serialize_scenario(a) == serialize_scenario(b) && a.slaves == b.slaves;
}

namespace presets {

Scenario tissue_ring(int n_slaves, double ring_radius_m) {
    Scenario s;
    s.name = "tissue_ring_" + std::to_string(n_slaves);
    const Position top{0.0, 0.0, 1.0};
    s.medium.blocks.push_back(tissue_slab(top, 0.4, 0.10));
    s.node.position = {0.0, 0.0, 0.98};
    s.leader = {0.5, 0.0, 1.0};
    s.layout.kind = "ring";
    s.layout.count = n_slaves;
    s.layout.center = {0.0, 0.0, 0.0};
    s.layout.radius_m = ring_radius_m;
    s.layout.height_m = 1.5;
    s.apply_layout();
    return s;
}

Scenario tissue_mobile(int n_slaves, double speed_mps) {
    Scenario s = tissue_ring(n_slaves);
    s.name = "tissue_mobile_" + std::to_string(n_slaves);
    s.medium.blocks = {{{-0.2, -0.5, 0.9}, {0.2, 0.5, 1.0}, 55.0}};
    s.node.position = {0.0, -0.4, 0.98};
    s.mobility.enabled = true;
    s.mobility.speed_mps = speed_mps;
    s.mobility.duration_s = 30.0;
    s.mobility.waypoints = {{0.0, -0.4, 0.98}, {0.0, 0.4, 0.98}};
    // Short dwells so the loop can follow a moving node, and a decaying reference so
    // a stale best does not block every later trial.
    s.radio.symbols_per_measurement = 16;
    s.alignment.config.forgetting = 0.05;
    return s;
}

Scenario testbed(int n_slaves) {
    Scenario s;
    s.name = "testbed_" + std::to_string(n_slaves);
    const Position top{9.0, 9.0, 1.0};
    s.medium.blocks.push_back(tissue_slab(top, 0.4, 0.10));
    s.node.position = {9.0, 9.0, 0.98};
    s.leader = {9.5, 9.0, 1.0};
    s.layout.kind = "ceiling_grid";
    s.layout.count = n_slaves;
    s.layout.center = {9.0, 9.0, 0.0};
    s.layout.extent_m = 18.0;
    s.layout.height_m = 3.0;
    s.apply_layout();
    return s;
}

}  // namespace presets

}  // namespace bab
