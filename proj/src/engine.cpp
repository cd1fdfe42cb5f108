#include "bab/engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>

namespace bab::engine {

namespace {

constexpr std::uint64_t kBackscatterLink = 0xbac5ca77e4ULL;

double lerp_trajectory(const std::vector<TrajectoryPoint>& tr, double t, Position& out) {
    if (tr.empty()) throw std::domain_error("trajectory: empty");
    if (t < tr.front().time_s - 1e-12 || t > tr.back().time_s + 1e-12)
        throw std::domain_error("trajectory: time outside the trajectory span");
    const auto it = std::upper_bound(tr.begin(), tr.end(), t,
                                     [](double v, const TrajectoryPoint& p) { return v < p.time_s; });
    if (it == tr.begin()) {
        out = tr.front().position;
        return 0.0;
    }
    if (it == tr.end()) {
        out = tr.back().position;
        return 0.0;
    }
    const auto& a = *(it - 1);
    const auto& b = *it;
    const double w = (t - a.time_s) / (b.time_s - a.time_s);
    out = a.position + w * (b.position - a.position);
    return b.speed_mps;
}

channel::ChannelConfig slave_channel_config(const Scenario& s) {
    channel::ChannelConfig c;
    c.seed = s.seed;
    c.tx_gain_dbi = s.radio.tx_gain_dbi;
    c.rayleigh = s.radio.rayleigh;
    c.rayleigh_scale = s.radio.rayleigh_scale;
    return c;
}

std::vector<cplx> links_to(const Scenario& s, const channel::ChannelConfig& cfg, Position rx) {
    const double drive = std::sqrt(dbm_to_watts(s.radio.tx_power_dbm));
    std::vector<cplx> h(s.slaves.size());
    for (std::size_t i = 0; i < s.slaves.size(); ++i)
        h[i] = drive * channel::channel(s.slaves[i], rx, s.medium, cfg, i).value();
    return h;
}

}  // namespace

Position trajectory_position(const Scenario& s, double t_s) {
    if (!s.mobility.enabled) {
        if (t_s != 0.0 && !(t_s >= 0.0)) throw std::domain_error("trajectory: negative time");
        return s.node.position;
    }
    Position p;
    lerp_trajectory(s.mobility.trajectory(), t_s, p);
    return p;
}

std::vector<cplx> mobility_step(const Scenario& s, double t_s) {
    return links_to(s, slave_channel_config(s), trajectory_position(s, t_s));
}

Simulation::Simulation(const Scenario& s)
    : s_(s),
      node_(s.node),
      slave_cfg_(slave_channel_config(s)),
      symbol_correlator_(dsp::generate_chirp(s.chirp), s.chirp.samples_per_symbol()) {
    node_cfg_ = slave_cfg_;
    node_cfg_.tx_gain_dbi = 0.0;
    node_cfg_.rayleigh = false;
    const std::size_t k = s.chirp.samples_per_symbol() * s.radio.symbols_per_measurement;
    unit_train_ = dsp::generate_chirp_train(s.chirp, k, 0.0);
    downmix_.resize(k);
    const double w = kTwoPi * s.node.shift_hz / s.chirp.sample_rate_hz;
    for (std::size_t n = 0; n < k; ++n) downmix_[n] = std::polar(1.0, -std::fmod(w * n, kTwoPi));
    noise_var_ = dsp::noise_variance_for_floor(s.chirp, dbm_to_watts(s.radio.noise_floor_dbm));

    // Zero-lag response of the chain to a unit field, through reflect() at 1 W incident.
    // Every later round only rescales it: the chain is linear once the node's power
    // conversion gain is fixed.
    backscatter::BackscatterNode probe = s.node;
    probe.awake = true;
    dsp::ComplexSignal unit_rx = backscatter::reflect(probe, unit_train_);
    for (std::size_t n = 0; n < k; ++n) unit_rx.samples[n] *= downmix_[n];
    unit_gain_ = std::sqrt(2.0 * s.node.curve.reflected_power(1.0));
    const std::size_t period = s.chirp.samples_per_symbol();
    dsp::ComplexSignal block;
    block.sample_rate_hz = unit_rx.sample_rate_hz;
    for (int j = 0; j < s.radio.symbols_per_measurement; ++j) {
        block.samples.assign(unit_rx.samples.begin() + j * period, unit_rx.samples.begin() + (j + 1) * period);
        unit_chirp_zero_lag_.push_back(symbol_correlator_.zero_lag(block));
        // The train repeats the symbol sample for sample, so the dwell's zero lag is
        // the sum of the per-symbol ones.
        unit_zero_lag_ += unit_chirp_zero_lag_.back();
    }
    if (s.radio.noise_model == NoiseModel::Waveform) correlator_.emplace(unit_train_, k);
    h_leader_ = links_to(s, slave_cfg_, s.leader);
    set_time(0.0);
}

void Simulation::set_time(double t_s) {
    node_.position = trajectory_position(s_, t_s);
    h_node_ = links_to(s_, slave_cfg_, node_.position);
    h_back_ = channel::channel(node_.position, s_.leader, s_.medium, node_cfg_, kBackscatterLink).value();
}

double Simulation::optimal_amplitude() const {
    double a = 0.0;
    for (const auto& h : h_node_) a += std::abs(h);
    return a;
}

cplx Simulation::incident_field(const std::vector<double>& phases) const {
    cplx sum{};
    for (std::size_t i = 0; i < h_node_.size(); ++i) sum += h_node_[i] * std::polar(1.0, phases[i]);
    return sum;
}

double Simulation::round_duration_s() const {
    return s_.radio.symbols_per_measurement * s_.chirp.symbol_time_s + s_.radio.feedback_latency_s;
}

double Simulation::detection_threshold() const {
    const double k = static_cast<double>(unit_train_.size());
    return std::sqrt(k * noise_var_ * std::log(1.0 / s_.radio.detection_pfa));
}

dsp::ComplexSignal Simulation::leader_rx(const std::vector<double>& phases) {
    const cplx field = incident_field(phases);
    node_ = backscatter::harvest_step(node_, std::norm(field), round_duration_s());

    dsp::ComplexSignal incident;
    incident.sample_rate_hz = unit_train_.sample_rate_hz;
    incident.samples.resize(unit_train_.size());
    for (std::size_t n = 0; n < incident.size(); ++n) incident.samples[n] = field * unit_train_.samples[n];

    dsp::ComplexSignal rx = backscatter::reflect(node_, incident);
    for (auto& v : rx.samples) v *= h_back_;
    return rx;
}

cplx Simulation::projected_scale(const std::vector<double>& phases) {
    const cplx field = incident_field(phases);
    const double p_in = std::norm(field);
    node_ = backscatter::harvest_step(node_, p_in, round_duration_s());
    if (!node_.awake || !(p_in > 0.0)) return {};
    return field * h_back_ * (std::sqrt(2.0 * node_.curve.reflected_power(p_in) / p_in) / unit_gain_);
}

double Simulation::measure(const std::vector<double>& phases, std::mt19937_64& rng) {
    if (s_.radio.noise_model == NoiseModel::Waveform) {
        dsp::ComplexSignal rx = leader_rx(phases);
        dsp::add_awgn(rx, noise_var_, rng);
        for (std::size_t n = 0; n < rx.size(); ++n) rx.samples[n] *= downmix_[n];
        return correlator_->p_ccs0(rx);
    }
    std::normal_distribution<double> n01(0.0, std::sqrt(0.5 * noise_var_ * unit_train_.size()));
    cplx z = projected_scale(phases) * unit_zero_lag_;
    z += cplx(n01(rng), n01(rng));
    return std::abs(z);
}

std::vector<double> Simulation::measure_chirps(const std::vector<double>& phases, std::mt19937_64& rng) {
    const std::size_t period = s_.chirp.samples_per_symbol();
    std::vector<double> out(static_cast<std::size_t>(s_.radio.symbols_per_measurement));
    if (s_.radio.noise_model == NoiseModel::Projected) {
        std::normal_distribution<double> n01(0.0, std::sqrt(0.5 * noise_var_ * period));
        const cplx a = projected_scale(phases);
        for (std::size_t k = 0; k < out.size(); ++k) {
            cplx z = a * unit_chirp_zero_lag_[k];
            z += cplx(n01(rng), n01(rng));
            out[k] = std::abs(z);
        }
        return out;
    }
    dsp::ComplexSignal rx = leader_rx(phases);
    dsp::add_awgn(rx, noise_var_, rng);
    for (std::size_t n = 0; n < rx.size(); ++n) rx.samples[n] *= downmix_[n];
    dsp::ComplexSignal block;
    block.sample_rate_hz = rx.sample_rate_hz;
    for (std::size_t k = 0; k < out.size(); ++k) {
        block.samples.assign(rx.samples.begin() + k * period, rx.samples.begin() + (k + 1) * period);
        out[k] = symbol_correlator_.p_ccs0(block);
    }
    return out;
}

double optimal_amplitude(const Scenario& s) {
    double a = 0.0;
    for (const auto& h : mobility_step(s, 0.0)) a += std::abs(h);
    return a;
}

std::vector<double> heatmap(const Scenario& s, const std::vector<double>& phases, const field::Grid& grid, Exec exec) {
    const auto m = field::build_channels(grid, s.slaves, s.medium, slave_channel_config(s),
                                         std::sqrt(dbm_to_watts(s.radio.tx_power_dbm)), exec);
    std::vector<double> out(grid.size());
    field::field_power(m, field::phase_weights(phases), out, exec);
    return out;
}

beamform::BoundSchedule cached_schedule(int n, const backscatter::TransferCurve& curve, int horizon,
                                        double dead_band) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, double, std::vector<double>, std::vector<double>>, beamform::BoundSchedule>
        cache;
    auto key = std::make_tuple(n, horizon, dead_band, curve.input_dbm, curve.ratio_db);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    beamform::ScheduleOptions opt;
    opt.dead_band = dead_band;
    auto sched = beamform::compute_bound_schedule(n, curve, horizon, opt);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, sched);
    return sched;
}

namespace {

struct Recorder {
    Metrics& m;
    void event(const std::string& stage, const std::string& what, int round = 0) {
        m.transcript.push_back({stage, what, round});
    }
};

void summarize(Metrics& m, std::size_t first_row, const std::vector<double>& opt_by_row) {
    double amp = 0.0, ref = 0.0, opt = 0.0, inc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = first_row; i < m.power_trace.size(); ++i) {
        amp += std::sqrt(m.power_trace[i].incident_power_w);
        ref += std::sqrt(m.power_trace[i].reference_power_w);
        opt += opt_by_row[i];
        inc += m.power_trace[i].incident_power_w;
        ++cnt;
    }
    if (cnt == 0 || opt <= 0.0) return;
    m.power_percentage = (amp / opt) * (amp / opt);
    m.reference_power_percentage = (ref / opt) * (ref / opt);
    m.optimal_amplitude = opt / cnt;
    m.mean_incident_power_w = inc / cnt;
}

}  // namespace

Metrics run_scenario(const Scenario& s) {
    s.validate();
    Metrics m;
    m.scenario = s.name;
    m.seed = s.seed;
    m.slaves = static_cast<int>(s.slaves.size());
    m.method = s.baseline == Baseline::RandomPhase ? "random_phase" : "one_bit";
    m.radiated_power_w = dbm_to_watts(s.radio.tx_power_dbm) * s.slaves.size();
    Recorder rec{m};

    Simulation sim(s);
    std::mt19937_64 noise_rng(mix_seed(s.seed, 3));
    const std::size_t n = s.slaves.size();
    const double dt = sim.round_duration_s();
    const bool mobile = s.mobility.enabled;
    const double span = mobile ? s.mobility.trajectory().back().time_s : 0.0;
    std::vector<double> opt_by_row;

    auto log_round = [&](int round, double t, const std::vector<double>& phases, double y_raw, double y_s,
                         double phi, const std::vector<double>& reference) {
        const cplx f = sim.incident_field(phases);
        const double opt = sim.optimal_amplitude();
        TraceRow row;
        row.round = round;
        row.time_s = t;
        row.y_raw = y_raw;
        row.y_smoothed = y_s;
        row.phi_deg = rad_to_deg(phi);
        row.incident_power_w = std::norm(f);
        row.reference_power_w = std::norm(sim.incident_field(reference));
        row.power_percentage = opt > 0.0 ? row.incident_power_w / (opt * opt) : 0.0;
        row.awake = sim.node_awake();
        m.power_trace.push_back(row);
        opt_by_row.push_back(opt);
    };

    if (s.baseline == Baseline::RandomPhase) {
        rec.event("baseline", "begin");
        std::mt19937_64 prng(mix_seed(s.seed, 4));
        std::uniform_real_distribution<double> u(0.0, kTwoPi);
        std::vector<double> ph(n);
        int round = 0;
        auto step = [&](double t) {
            for (auto& p : ph) p = u(prng);
            const double y = sim.measure(ph, noise_rng);
            log_round(round++, t, ph, y, y, kPi, ph);
        };
        for (int r = 0; r < s.alignment.rounds; ++r) step(0.0);
        std::size_t first = m.power_trace.size() - std::min<std::size_t>(s.alignment.metrics_window, m.power_trace.size());
        if (mobile) {
            first = m.power_trace.size();
            for (double t = 0.0; t <= span; t += dt) {
                sim.set_time(t);
                step(t);
            }
        }
        rec.event("baseline", "end", round);
        summarize(m, first, opt_by_row);
        return m;
    }

    // Stage 1: clock synchronisation.
    rec.event("sync", "begin");
    if (s.sync.enabled && n >= 2) {
        m.sync.ran = true;
        std::mt19937_64 crng(mix_seed(s.seed, 1));
        std::uniform_real_distribution<double> off(0.0, s.sync.max_offset_samples);
        std::vector<sync::SlaveClock> clocks(n);
        for (auto& c : clocks) c.offset_samples = off(crng);
        std::vector<double> amps(n);
        double amax = 0.0;
        for (std::size_t i = 0; i < n; ++i) amax = std::max(amax, std::abs(sim.leader_channels()[i]));
        for (std::size_t i = 0; i < n; ++i) amps[i] = std::abs(sim.leader_channels()[i]) / amax;
        auto cfg = s.sync.config;
        cfg.chirp = s.chirp;
        try {
            const auto r = sync::run_sync(clocks, amps, cfg, mix_seed(s.seed, 2));
            m.sync.periods = r.periods;
            std::vector<double> abs_res;
            for (std::size_t i = 1; i < n; ++i) {
                m.sync.total_rounds += r.rounds[i];
                abs_res.push_back(std::abs(r.final_residual[i]));
            }
            std::sort(abs_res.begin(), abs_res.end());
            m.sync.max_abs_residual = abs_res.back();
            m.sync.median_abs_residual = abs_res[abs_res.size() / 2];
        } catch (const sync::SyncError& e) {
            m.sync.failed = true;
            m.sync.error = e.what();
            rec.event("sync", "failed");
            return m;
        }
    }
    rec.event("sync", "end");

    // Stage 2: cold start.
    std::vector<double> start(n, 0.0);
    bool have_start = false;
    rec.event("cold_start", "begin");
    if (s.cold_start.enabled) {
        m.cold_start.attempted = true;
        std::mt19937_64 crng(mix_seed(s.seed, 5));
        const auto base = coldstart::focus_phases(sim.leader_channels());
        const double thr = sim.detection_threshold();
        auto probe = [&](const std::vector<double>& ph) {
            const double y = sim.measure(ph, noise_rng);
            return sim.node_awake() && y > thr;
        };
        const auto r = coldstart::search(base, s.cold_start.config, crng, probe);
        m.cold_start.success = r.success;
        m.cold_start.rounds = r.rounds_used;
        if (!r.success) {
            rec.event("cold_start", "failed", r.rounds_used);
            return m;
        }
        start = r.phases;
        have_start = true;
    }
    rec.event("cold_start", "end", m.cold_start.rounds);

    // Stage 3: one-bit alignment.
    rec.event("alignment", "begin");
    auto acfg = s.alignment.config;
    beamform::BoundSchedule sched;
    if (n < 2) acfg.mode = beamform::BoundMode::Fixed;
    else if (acfg.mode == beamform::BoundMode::Schedule)
        sched = cached_schedule(static_cast<int>(n), s.node.curve, s.alignment.rounds, acfg.dead_band);
    beamform::Aligner al(n, acfg, sched, mix_seed(s.seed, 6));
    if (have_start) al.set_phases(start);

    int round = 0;
    auto step = [&](double t) {
        const auto ph = al.state().phases;
        const auto samples = sim.measure_chirps(ph, noise_rng);
        const auto r = al.alignment_round(samples);
        log_round(round++, t, ph, r.y_raw, r.y_smoothed, r.phi, al.state().best_phases);
    };
    for (int r = 0; r < s.alignment.rounds; ++r) step(0.0);
    std::size_t first = m.power_trace.size() - std::min<std::size_t>(s.alignment.metrics_window, m.power_trace.size());
    if (mobile) {
        first = m.power_trace.size();
        for (double t = 0.0; t <= span; t += dt) {
            sim.set_time(t);
            step(t);
        }
    }
    m.rounds_to_converge = al.converged_round();
    rec.event("alignment", "end", round);
    summarize(m, first, opt_by_row);

    if (s.heatmap.enabled) {
        Heatmap h;
        h.grid = field::plane_grid(s.heatmap.center, s.heatmap.width_m, s.heatmap.depth_m, s.heatmap.voxel_m);
        h.power_w = heatmap(s, al.state().best_phases, h.grid);
        m.heatmap = std::move(h);
    }
    return m;
}

std::string metrics_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["scenario"] = m.scenario;
    j["method"] = m.method;
    j["seed"] = m.seed;
    j["slaves"] = m.slaves;
    j["power_percentage"] = m.power_percentage;
    j["reference_power_percentage"] = m.reference_power_percentage;
    j["rounds_to_converge"] = m.rounds_to_converge;
    j["optimal_amplitude_sqrt_w"] = m.optimal_amplitude;
    j["mean_incident_power_w"] = m.mean_incident_power_w;
    j["radiated_power_w"] = m.radiated_power_w;
    j["sync"] = {{"ran", m.sync.ran},
                 {"failed", m.sync.failed},
                 {"error", m.sync.error},
                 {"periods", m.sync.periods},
                 {"total_rounds", m.sync.total_rounds},
                 {"max_abs_residual_samples", m.sync.max_abs_residual},
                 {"median_abs_residual_samples", m.sync.median_abs_residual}};
    j["cold_start"] = {{"attempted", m.cold_start.attempted},
                       {"success", m.cold_start.success},
                       {"rounds", m.cold_start.rounds}};
    auto ev = nlohmann::ordered_json::array();
    for (const auto& e : m.transcript) ev.push_back({{"stage", e.stage}, {"what", e.what}, {"round", e.round}});
    j["transcript"] = ev;
    j["trace_rounds"] = m.power_trace.size();
    if (m.heatmap) {
        double mx = 0.0;
        for (double v : m.heatmap->power_w) mx = std::max(mx, v);
        j["max_voxel_power_w"] = mx;
    }
    return j.dump(2) + "\n";
}

void write_metrics(const std::string& path, const Metrics& m) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << metrics_json(m);
}

void write_trace_csv(const std::string& path, const Metrics& m) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f.precision(12);
    f << "round,y_raw,y_smoothed,phi_deg,power_percentage\n";
    for (const auto& r : m.power_trace)
        f << r.round << ',' << r.y_raw << ',' << r.y_smoothed << ',' << r.phi_deg << ',' << r.power_percentage << '\n';
}

void write_heatmap_csv(const std::string& path, const Heatmap& h) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f.precision(12);
    f << "x_m,y_m,z_m,power_w\n";
    for (std::size_t v = 0; v < h.power_w.size(); ++v) {
        const Position p = h.grid.at(v);
        f << p.x << ',' << p.y << ',' << p.z << ',' << h.power_w[v] << '\n';
    }
}

}  // namespace bab::engine
