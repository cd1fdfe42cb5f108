#include "bab/beamform.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "bab/bessel.hpp"

namespace bab::beamform {

double c_phi(double phi) { return phi == 0.0 ? 1.0 : std::sin(phi) / phi; }

double expected_amplitude_step_eta(double y, int n, double phi, double eta, double dead_band) {
    const double c = c_phi(phi);
    const double c2 = c_phi(2.0 * phi);
    const double ratio2 = special::bessel_ratio(2, eta);
    const double var = std::max(0.0, 0.5 * n * ((1.0 - c * c) - ratio2 * (c * c - c2)));
    const double sigma = std::sqrt(var);
    if (sigma == 0.0) return y;
    // Trial amplitude ~ N(y c, var), accepted above y (1 + dead_band).
    const double d = y * (1.0 + dead_band - c);
    const double p = special::q_function(d / sigma);
    return y * (1.0 - p * (1.0 - c)) + sigma / std::sqrt(2.0 * kPi) * std::exp(-d * d / (2.0 * var));
}

double expected_amplitude_step(double y, int n, double phi, double dead_band) {
    if (n < 1) throw std::domain_error("expected_amplitude_step: need at least one slave");
    if (!(y >= 0.0) || y > n * (1.0 + 1e-12)) throw std::domain_error("expected_amplitude_step: y outside [0, N]");
    if (!(phi > 0.0) || phi > kPi + 1e-12) throw std::domain_error("expected_amplitude_step: phi outside (0, pi]");
    if (!(dead_band >= 0.0)) throw std::domain_error("expected_amplitude_step: negative dead band");
    const double r = std::min(y / n, 1.0 - 1e-12);
    return expected_amplitude_step_eta(std::min<double>(y, n), n, phi, special::solve_concentration(r), dead_band);
}

double BoundSchedule::at(int n) const {
    double u = 0.0;
    if (horizon > 1) u = std::clamp(2.0 * n / (horizon - 1) - 1.0, -1.0, 1.0);
    double v = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) v = v * u + *it;
    return std::clamp(v, phi_min, phi_max);
}

BoundSchedule fit_schedule(const std::vector<double>& raw, int degree, double phi_min, double phi_max) {
    if (raw.empty()) throw std::domain_error("fit_schedule: empty input");
    const int h = static_cast<int>(raw.size());
    const int d = std::min(degree, h - 1);
    Eigen::MatrixXd a(h, d + 1);
    Eigen::VectorXd b(h);
    for (int i = 0; i < h; ++i) {
        const double u = h > 1 ? 2.0 * i / (h - 1) - 1.0 : 0.0;
        double p = 1.0;
        for (int j = 0; j <= d; ++j) {
            a(i, j) = p;
            p *= u;
        }
        b(i) = raw[i];
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    BoundSchedule s;
    s.coefficients.assign(x.data(), x.data() + x.size());
    s.horizon = h;
    s.phi_min = phi_min;
    s.phi_max = phi_max;
    s.raw = raw;
    return s;
}

BoundSchedule compute_bound_schedule(int n, const backscatter::TransferCurve& curve, int horizon,
                                     const ScheduleOptions& opt) {
    if (n < 2) throw std::domain_error("compute_bound_schedule: need at least two slaves");
    if (horizon < 1) throw std::domain_error("compute_bound_schedule: horizon must be positive");
    curve.validate();
    if (!curve.is_monotone()) throw std::domain_error("compute_bound_schedule: transfer curve is not monotone");

    std::vector<double> grid;
    for (double g = opt.phi_min_deg; g <= opt.phi_max_deg + 1e-9; g += opt.grid_step_deg)
        grid.push_back(deg_to_rad(std::min(g, 180.0)));
    auto metric = [&](double amp) { return curve.reflected_power(amp * amp * opt.unit_power_w); };

    std::vector<double> raw;
    raw.reserve(horizon);
    double y = std::min<double>(n, 0.5 * std::sqrt(kPi * n));
    for (int t = 0; t < horizon; ++t) {
        const double r = y / n;
        double best_phi = grid.front();
        double best_y = y;
        if (r < 1.0 - 1e-12) {
            const double eta = special::solve_concentration(r);
            const double base = metric(y);
            double best_gain = 0.0;
            for (double phi : grid) {
                const double ny = std::min<double>(n, expected_amplitude_step_eta(y, n, phi, eta, opt.dead_band));
                const double gain = metric(ny) - base;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_phi = phi;
                    best_y = ny;
                }
            }
            // No measurable expected gain left: explore as little as the grid allows.
            if (!(best_gain > 1e-12 * std::max(base, 1e-300))) {
                best_phi = grid.front();
                best_y = std::min<double>(n, expected_amplitude_step_eta(y, n, best_phi, eta, opt.dead_band));
            }
        }
        raw.push_back(best_phi);
        y = best_y;
    }
    return fit_schedule(raw, opt.degree, grid.front(), grid.back());
}

double KalmanSmoother::smooth(double z) {
    if (!std::isfinite(z)) throw std::domain_error("smooth: non-finite sample");
    if (!init_) {
        init_ = true;
        x_ = z;
        if (!(r_ > 0.0)) r_ = std::max(z * z, 1e-300);
        p_ = r_;
        return x_;
    }
    const double q = std::pow(cfg_.process_rel * x_, 2);
    const double pm = p_ + q;
    const double k = pm / (pm + r_);
    x_ += k * (z - x_);
    p_ = std::max((1.0 - k) * pm, 1e-300);
    // Residual-based adaptive r: mean squared post-update residual plus the posterior variance.
    const double eps = z - x_;
    resid_sq_.push_back(eps * eps);
    if (resid_sq_.size() > std::max<std::size_t>(cfg_.window, 1)) resid_sq_.pop_front();
    double c = 0.0;
    for (double v : resid_sq_) c += v;
    c /= static_cast<double>(resid_sq_.size());
    r_ = std::max(c + p_, cfg_.r_floor_rel * std::max(x_ * x_, 1e-300));
    return x_;
}

Aligner::Aligner(std::size_t n_slaves, AlignmentConfig cfg, BoundSchedule schedule, std::uint64_t seed)
    : cfg_(cfg), schedule_(std::move(schedule)), smoother_(cfg.kalman), rng_(mix_seed(seed, 0xa11a)) {
    if (n_slaves == 0) throw std::domain_error("Aligner: no slaves");
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    state_.phases.resize(n_slaves);
    for (auto& p : state_.phases) p = u(rng_);
    state_.best_phases = state_.phases;
}

void Aligner::set_phases(const std::vector<double>& phases) {
    if (phases.size() != state_.phases.size()) throw std::invalid_argument("set_phases: size mismatch");
    for (std::size_t i = 0; i < phases.size(); ++i) state_.phases[i] = wrap_phase(phases[i]);
    state_.best_phases = state_.phases;
}

double Aligner::phi(int round) const {
    if (cfg_.mode == BoundMode::Fixed) return deg_to_rad(cfg_.fixed_phi_deg);
    return schedule_.at(round);
}

RoundRecord Aligner::alignment_round(double measured) { return alignment_round(std::span<const double>(&measured, 1)); }

RoundRecord Aligner::alignment_round(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("alignment_round: no samples");
    RoundRecord rec;
    rec.round = state_.round;
    rec.y_raw = samples.back();
    rec.y_smoothed = rec.y_raw;
    if (cfg_.smoothing) {
        smoother_.restart();
        for (double v : samples) rec.y_smoothed = smoother_.smooth(v);
    } else if (!std::isfinite(rec.y_raw)) {
        throw std::domain_error("alignment_round: non-finite sample");
    }

    if (state_.has_reference && cfg_.forgetting > 0.0) state_.y_best *= (1.0 - cfg_.forgetting);
    rec.improved = !state_.has_reference || rec.y_smoothed > state_.y_best * (1.0 + cfg_.dead_band);
    if (rec.improved) {
        state_.best_phases = state_.phases;
        state_.y_best = rec.y_smoothed;
        state_.has_reference = true;
    }

    rec.phi = phi(state_.round);
    std::uniform_real_distribution<double> d(-rec.phi, rec.phi);
    for (std::size_t i = 0; i < state_.phases.size(); ++i) state_.phases[i] = wrap_phase(state_.best_phases[i] + d(rng_));

    best_history_.push_back(state_.y_best);
    if (best_history_.size() > static_cast<std::size_t>(cfg_.convergence_window) + 1) best_history_.pop_front();
    if (converged_round_ < 0 && best_history_.size() == static_cast<std::size_t>(cfg_.convergence_window) + 1 &&
        state_.y_best <= best_history_.front() * (1.0 + cfg_.convergence_tol))
        converged_round_ = state_.round;
    ++state_.round;
    return rec;
}

std::vector<double> simulate_unit_loop(int n, int rounds, const AlignmentConfig& cfg, const BoundSchedule& schedule,
                                       std::uint64_t seed) {
    Aligner al(static_cast<std::size_t>(n), cfg, schedule, seed);
    std::vector<double> traj;
    traj.reserve(rounds + 1);
    for (int r = 0; r <= rounds; ++r) {
        double re = 0.0, im = 0.0;
        for (double p : al.state().phases) {
            re += std::cos(p);
            im += std::sin(p);
        }
        al.alignment_round(std::hypot(re, im));
        traj.push_back(al.state().y_best);
    }
    return traj;
}

void write_trace_header(std::ostream& os, std::size_t n_slaves) {
    os << "round,y_raw,y_smoothed,phi_deg,power_percentage";
    for (std::size_t i = 0; i < n_slaves; ++i) os << ",theta_" << i;
    os << '\n';
}

}  // namespace bab::beamform
