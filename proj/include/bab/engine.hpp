#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bab/field.hpp"
#include "bab/scenario.hpp"

namespace bab::engine {

struct TraceRow {
    int round = 0;
    double time_s = 0.0;
    double y_raw = 0.0;
    double y_smoothed = 0.0;
    double phi_deg = 0.0;
    double power_percentage = 0.0;
    double incident_power_w = 0.0;
    double reference_power_w = 0.0;  // with the phases kept as reference after this round
    bool awake = false;
};

struct Event {
    std::string stage;
    std::string what;
    int round = 0;
};

struct SyncOutcome {
    bool ran = false;
    bool failed = false;
    std::string error;
    int periods = 0;
    int total_rounds = 0;
    double max_abs_residual = 0.0;
    double median_abs_residual = 0.0;
};

struct ColdStartOutcome {
    bool attempted = false;
    bool success = false;
    int rounds = 0;
};

struct Heatmap {
    field::Grid grid;
    std::vector<double> power_w;
};

struct Metrics {
    std::string scenario;
    std::string method;
    std::uint64_t seed = 0;
    int slaves = 0;
    double power_percentage = 0.0;
    double reference_power_percentage = 0.0;
    int rounds_to_converge = -1;
    double optimal_amplitude = 0.0;  // sqrt(W) at the node, mean over the metrics window
    double mean_incident_power_w = 0.0;
    double radiated_power_w = 0.0;
    SyncOutcome sync;
    ColdStartOutcome cold_start;
    std::vector<TraceRow> power_trace;
    std::vector<Event> transcript;
    std::optional<Heatmap> heatmap;
};

// Channel state plus the leader's measurement chain for one scenario.
class Simulation {
public:
    explicit Simulation(const Scenario& s);

    // Moves the node along the trajectory and recomputes every channel.
    void set_time(double t_s);
    Position node_position() const { return node_.position; }
    const std::vector<cplx>& node_channels() const { return h_node_; }
    const std::vector<cplx>& leader_channels() const { return h_leader_; }
    double optimal_amplitude() const;
    cplx incident_field(const std::vector<double>& phases) const;

    // One round: drive the node with `phases`, update its wake state, return P_CCS(0)
    // measured by the leader on the shifted band.
    double measure(const std::vector<double>& phases, std::mt19937_64& rng);
    // Same dwell, one P_CCS(0) sample per chirp symbol.
    std::vector<double> measure_chirps(const std::vector<double>& phases, std::mt19937_64& rng);
    bool node_awake() const { return node_.awake; }
    double detection_threshold() const;
    double round_duration_s() const;

private:
    const Scenario& s_;
    backscatter::BackscatterNode node_;
    channel::ChannelConfig slave_cfg_;
    channel::ChannelConfig node_cfg_;
    std::vector<cplx> h_node_;
    std::vector<cplx> h_leader_;
    cplx h_back_{};
    double noise_var_ = 0.0;
    dsp::ComplexSignal unit_train_;
    std::vector<cplx> downmix_;
    std::optional<dsp::CcsCorrelator> correlator_;  // whole dwell; waveform noise only
    dsp::CcsCorrelator symbol_correlator_;
    double unit_gain_ = 0.0;
    cplx unit_zero_lag_{};
    std::vector<cplx> unit_chirp_zero_lag_;

    dsp::ComplexSignal leader_rx(const std::vector<double>& phases);
    // Factor mapping the unit-field zero-lag response onto this round's; also updates the
    // node's wake state.
    cplx projected_scale(const std::vector<double>& phases);
};

double optimal_amplitude(const Scenario& s);
// Channels (sqrt(W) units) from every slave to the node at time t. Throws
// std::domain_error outside the trajectory span.
std::vector<cplx> mobility_step(const Scenario& s, double t_s);
Position trajectory_position(const Scenario& s, double t_s);

std::vector<double> heatmap(const Scenario& s, const std::vector<double>& phases, const field::Grid& grid,
                            Exec exec = Exec::Parallel);

Metrics run_scenario(const Scenario& s);

std::string metrics_json(const Metrics& m);
void write_metrics(const std::string& path, const Metrics& m);
void write_trace_csv(const std::string& path, const Metrics& m);
void write_heatmap_csv(const std::string& path, const Heatmap& h);

// Memoized compute_bound_schedule. The drive level is left at its default: with a
// monotone curve the per-round argmax does not depend on it.
beamform::BoundSchedule cached_schedule(int n, const backscatter::TransferCurve& curve, int horizon,
                                        double dead_band);

}  // namespace bab::engine
