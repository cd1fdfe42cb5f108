#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <span>
#include <vector>

#include "bab/backscatter.hpp"

namespace bab::beamform {

// E[cos d] for d uniform in [-phi, phi].
double c_phi(double phi);

// Expected amplitude after one keep-if-improved round with unit-amplitude slaves,
// Gaussian approximation of the in-phase gain. A trial is kept when it exceeds
// y (1 + dead_band). Throws std::domain_error for y outside [0, n], phi outside (0, pi]
// or a negative dead band.
double expected_amplitude_step(double y, int n, double phi, double dead_band = 0.0);

// Same, with the concentration eta already solved for y / n.
double expected_amplitude_step_eta(double y, int n, double phi, double eta, double dead_band = 0.0);

// Phi(n) as a degree-7 polynomial in u = 2 n / (horizon - 1) - 1, clamped.
struct BoundSchedule {
    std::vector<double> coefficients;  // power basis in u, lowest order first
    int horizon = 1;
    double phi_min = 0.0;
    double phi_max = kPi;
    std::vector<double> raw;  // per-round grid optimum the fit was made from

    double at(int n) const;
};

struct ScheduleOptions {
    int degree = 7;
    double grid_step_deg = 1.0;
    double phi_min_deg = 1.0;
    double phi_max_deg = 180.0;
    // Incident power per slave at the node when the metric is mapped through the curve.
    double unit_power_w = 1e-6;
    // Relative acceptance margin of the loop the schedule drives.
    double dead_band = 0.0;
};

// Greedy per-round argmax of the curve-composed expected gain over the Phi grid,
// iterated from the expected incoherent start, then least-squares fitted.
// Throws std::domain_error if the curve is not monotone.
BoundSchedule compute_bound_schedule(int n, const backscatter::TransferCurve& curve, int horizon,
                                     const ScheduleOptions& opt = {});

// Fit only; exposed for tests.
BoundSchedule fit_schedule(const std::vector<double>& raw, int degree, double phi_min, double phi_max);

struct KalmanConfig {
    double process_rel = 0.0;    // random-walk std-dev per step relative to the estimate
    std::size_t window = 10;     // residuals used for the adaptive measurement noise
    double r_floor_rel = 1e-12;  // lower bound of r relative to estimate^2
};

class KalmanSmoother {
public:
    explicit KalmanSmoother(KalmanConfig cfg = {}) : cfg_(cfg) {}

    double smooth(double sample);
    bool initialized() const { return init_; }
    double estimate() const { return x_; }
    double variance() const { return p_; }
    double measurement_noise() const { return r_; }
    void reset() { *this = KalmanSmoother(cfg_); }
    // Forgets the state but keeps the learned measurement noise; the next sample starts a
    // new constant-level segment with prior variance r.
    void restart() { init_ = false; }

private:
    KalmanConfig cfg_;
    bool init_ = false;
    double x_ = 0.0;
    double p_ = 1.0;
    double r_ = 0.0;
    std::deque<double> resid_sq_;
};

enum class BoundMode { Schedule, Fixed };

struct AlignmentConfig {
    double dead_band = 0.01;
    bool smoothing = true;
    KalmanConfig kalman;
    // Per-round decay of y_best; 0 keeps y_best non-decreasing.
    double forgetting = 0.0;
    BoundMode mode = BoundMode::Schedule;
    double fixed_phi_deg = 30.0;
    int convergence_window = 20;
    double convergence_tol = 0.005;
};

struct AlignmentState {
    std::vector<double> phases;       // transmitted this round
    std::vector<double> best_phases;  // reference
    double y_best = 0.0;
    int round = 0;
    bool has_reference = false;
};

struct RoundRecord {
    int round = 0;
    double y_raw = 0.0;
    double y_smoothed = 0.0;
    double phi = 0.0;  // bound used to draw the next trial
    bool improved = false;
};

class Aligner {
public:
    Aligner(std::size_t n_slaves, AlignmentConfig cfg, BoundSchedule schedule, std::uint64_t seed);

    // Starts from given phases instead of uniform random ones.
    void set_phases(const std::vector<double>& phases);

    // Consumes the measurement of the phases transmitted this round and prepares the
    // next trial in state().phases.
    RoundRecord alignment_round(double measured);
    // Same, from the per-chirp P_CCS(0) samples of one dwell. The smoother restarts
    // each round, since every round measures a different phase configuration.
    RoundRecord alignment_round(std::span<const double> samples);

    const AlignmentState& state() const { return state_; }
    double phi(int round) const;
    bool converged() const { return converged_round_ >= 0; }
    int converged_round() const { return converged_round_; }

private:
    AlignmentConfig cfg_;
    BoundSchedule schedule_;
    AlignmentState state_;
    KalmanSmoother smoother_;
    std::mt19937_64 rng_;
    std::deque<double> best_history_;
    int converged_round_ = -1;
};

// Noiseless reference loop with unit-amplitude slaves: returns |sum e^{j theta}| of the
// reference after each of `rounds` rounds (entry 0 is the random start).
std::vector<double> simulate_unit_loop(int n, int rounds, const AlignmentConfig& cfg, const BoundSchedule& schedule,
                                       std::uint64_t seed);

void write_trace_header(std::ostream& os, std::size_t n_slaves);

}  // namespace bab::beamform
