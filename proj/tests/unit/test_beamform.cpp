#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "bab/beamform.hpp"
#include "bab/bessel.hpp"

using namespace bab;
using namespace bab::beamform;

namespace {

// Power series of I_k(x), valid oracle for moderate x.
double bessel_series(int k, double x) {
    double term = std::pow(0.5 * x, k) / std::tgamma(k + 1.0);
    double sum = term;
    for (int m = 1; m < 400; ++m) {
        term *= (0.25 * x * x) / (m * static_cast<double>(m + k));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

// Best-Fisher rejection sampler for the von Mises distribution.
double von_mises(std::mt19937_64& rng, double kappa) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (kappa < 1e-8) return kTwoPi * u(rng) - kPi;
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    for (;;) {
        const double z = std::cos(kPi * u(rng));
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        const double u2 = u(rng);
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0)
            return (u(rng) > 0.5 ? 1.0 : -1.0) * std::acos(f);
    }
}

// Mean gain of one keep-if-improved round simulated directly, slave phases von Mises(kappa).
double mc_gain(int n, double kappa, double phi, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-phi, phi);
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
        cplx a{}, b{};
        for (int i = 0; i < n; ++i) {
            const double th = von_mises(rng, kappa);
            a += std::polar(1.0, th);
            b += std::polar(1.0, th + d(rng));
        }
        acc += std::max(0.0, std::abs(b) - std::abs(a));
    }
    return acc / trials;
}

}  // namespace

TEST_CASE("c_phi is the mean of cos over a uniform perturbation") {
    std::mt19937_64 rng(2);
    for (double deg : {5.0, 30.0, 90.0, 170.0}) {
        const double phi = deg_to_rad(deg);
        std::uniform_real_distribution<double> d(-phi, phi);
        double acc = 0.0;
        for (int i = 0; i < 200000; ++i) acc += std::cos(d(rng));
        CHECK(c_phi(phi) == doctest::Approx(acc / 200000).epsilon(0.01));
    }
    CHECK(c_phi(0.0) == 1.0);
}

TEST_CASE("Bessel quadrature agrees with the power series") {
    for (int k : {0, 1, 2})
        for (double x : {0.0, 0.1, 1.0, 4.0, 12.0, 30.0}) {
            const double ref = bessel_series(k, x);
            if (ref == 0.0) {
                CHECK(special::bessel_i(k, x) == doctest::Approx(0.0));
                continue;
            }
            CHECK(special::bessel_i(k, x) == doctest::Approx(ref).epsilon(1e-10));
        }
}

TEST_CASE("Bessel ratio approaches 1 - 1/(2x) for large x and inverts through solve_concentration") {
    CHECK(special::bessel_ratio(1, 2000.0) == doctest::Approx(1.0 - 1.0 / 4000.0 - 1.0 / (8.0 * 2000.0 * 2000.0)).epsilon(1e-9));
    for (double r : {0.05, 0.3, 0.7, 0.95, 0.999}) {
        const double eta = special::solve_concentration(r);
        CHECK(special::bessel_ratio(1, eta) == doctest::Approx(r).epsilon(1e-8));
    }
    CHECK(special::solve_concentration(0.0) == 0.0);
    CHECK_THROWS_AS(special::solve_concentration(1.0), std::domain_error);
    CHECK_THROWS_AS(special::bessel_i_scaled(0, -1.0), std::domain_error);
}

TEST_CASE("quadrature integrates polynomials and exponentials") {
    CHECK(special::integrate([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0));
    CHECK(special::integrate([](double x) { return std::exp(-x); }, 0.0, 20.0) == doctest::Approx(1.0 - std::exp(-20.0)));
}

TEST_CASE("expected step from an incoherent start improves: N=10, phi=60 deg") {
    const double y0 = std::sqrt(10.0);
    const double y1 = expected_amplitude_step(y0, 10, deg_to_rad(60.0));
    CHECK(y1 > y0);
}

TEST_CASE("expected gain agrees with a direct simulation for N=10 at a small bound") {
    const int n = 10;
    const double phi = deg_to_rad(20.0);
    for (double r : {0.3, 0.6, 0.9}) {
        const double model = expected_amplitude_step(r * n, n, phi) - r * n;
        const double mc = mc_gain(n, special::solve_concentration(r), phi, 100000, 17);
        CHECK(model == doctest::Approx(mc).epsilon(0.05));
    }
}

TEST_CASE("dead band lowers the expected step and zero band is the default") {
    const double phi = deg_to_rad(20.0);
    const double a = expected_amplitude_step(7.0, 10, phi);
    CHECK(expected_amplitude_step(7.0, 10, phi, 0.0) == a);
    CHECK(expected_amplitude_step(7.0, 10, phi, 0.05) < a);
    CHECK(expected_amplitude_step(7.0, 10, phi, 0.05) >= 7.0 - 1e-12);
}

TEST_CASE("expected step input checks") {
    CHECK_THROWS_AS(expected_amplitude_step(1.0, 0, 0.5), std::domain_error);
    CHECK_THROWS_AS(expected_amplitude_step(11.0, 10, 0.5), std::domain_error);
    CHECK_THROWS_AS(expected_amplitude_step(1.0, 10, 0.0), std::domain_error);
    CHECK_THROWS_AS(expected_amplitude_step(1.0, 10, 4.0), std::domain_error);
    CHECK_THROWS_AS(expected_amplitude_step(1.0, 10, 0.5, -0.1), std::domain_error);
}

TEST_CASE("property: expected step never loses amplitude and stays within N") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> frac(0.01, 0.99), ph(0.02, kPi);
    for (int i = 0; i < 300; ++i) {
        const int n = 2 + static_cast<int>(rng() % 30);
        const double y = frac(rng) * n;
        const double next = expected_amplitude_step(y, n, ph(rng));
        CHECK(next >= y - 1e-9);
        CHECK(next <= n + 1e-9);
    }
}

TEST_CASE("schedule is positive and large-then-small") {
    const auto s = compute_bound_schedule(24, backscatter::TransferCurve::monotone_default(), 300);
    REQUIRE(s.raw.size() == 300);
    double early = 0.0, late = 0.0;
    for (int n = 0; n < 30; ++n) early += s.at(n);
    for (int n = 270; n < 300; ++n) late += s.at(n);
    CHECK(early > 2.0 * late);
    for (int n = 0; n < 300; ++n) CHECK(s.at(n) > 0.0);
    CHECK(s.coefficients.size() == 8);
}

TEST_CASE("grid refinement moves the first-round optimum by less than a coarse step") {
    const auto curve = backscatter::TransferCurve::monotone_default();
    ScheduleOptions coarse, fine;
    fine.grid_step_deg = 0.1;
    const auto a = compute_bound_schedule(10, curve, 5, coarse);
    const auto b = compute_bound_schedule(10, curve, 5, fine);
    CHECK(std::abs(rad_to_deg(a.raw[0] - b.raw[0])) <= coarse.grid_step_deg + 1e-9);
}

TEST_CASE("schedule rejects a non-monotone curve and bad sizes") {
    CHECK_THROWS_AS(compute_bound_schedule(10, backscatter::TransferCurve::legacy_nonmonotone(), 100), std::domain_error);
    CHECK_THROWS_AS(compute_bound_schedule(1, backscatter::TransferCurve::monotone_default(), 100), std::domain_error);
    CHECK_THROWS_AS(compute_bound_schedule(5, backscatter::TransferCurve::monotone_default(), 0), std::domain_error);
}

TEST_CASE("fit_schedule reproduces a cubic exactly") {
    std::vector<double> raw(50);
    for (int i = 0; i < 50; ++i) {
        const double u = 2.0 * i / 49.0 - 1.0;
        raw[i] = 1.0 + 0.3 * u - 0.2 * u * u + 0.1 * u * u * u;
    }
    const auto s = fit_schedule(raw, 7, 0.0, 10.0);
    for (int i = 0; i < 50; ++i) CHECK(s.at(i) == doctest::Approx(raw[i]).epsilon(1e-9));
    CHECK_THROWS_AS(fit_schedule({}, 7, 0.0, 1.0), std::domain_error);
}

TEST_CASE("Kalman: constant plus noise is averaged down") {
    const double sigma = 1.0;
    std::vector<double> finals;
    for (int seed = 0; seed < 1000; ++seed) {
        std::mt19937_64 rng(mix_seed(seed, 5));
        std::normal_distribution<double> n(10.0, sigma);
        KalmanSmoother k;
        double x = 0.0;
        for (int i = 0; i < 50; ++i) x = k.smooth(n(rng));
        finals.push_back(x);
    }
    double mean = 0.0, var = 0.0;
    for (double v : finals) mean += v;
    mean /= finals.size();
    for (double v : finals) var += (v - mean) * (v - mean);
    var /= finals.size() - 1;
    CHECK(var < sigma * sigma / 4.0);
    CHECK(mean == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("Kalman with process noise tracks a ramp with bounded lag") {
    KalmanConfig cfg;
    cfg.process_rel = 0.02;
    double worst = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(mix_seed(seed, 6));
        std::normal_distribution<double> n(0.0, 0.5);
        KalmanSmoother k(cfg);
        double lag = 0.0;
        for (int i = 0; i < 300; ++i) {
            const double truth = 50.0 + 0.5 * i;
            const double x = k.smooth(truth + n(rng));
            if (i >= 250) lag += truth - x;
        }
        worst = std::max(worst, lag / 50.0);
    }
    CHECK(worst < 5.0);
}

TEST_CASE("Kalman basics: first output is the sample, variance positive, restart keeps r") {
    KalmanSmoother k;
    CHECK_FALSE(k.initialized());
    CHECK(k.smooth(3.0) == 3.0);
    CHECK(k.variance() > 0.0);
    k.smooth(3.5);
    k.smooth(2.5);
    const double r = k.measurement_noise();
    k.restart();
    CHECK_FALSE(k.initialized());
    CHECK(k.smooth(4.0) == 4.0);
    CHECK(k.variance() == doctest::Approx(r));
    CHECK_THROWS_AS(k.smooth(std::nan("")), std::domain_error);
}

TEST_CASE("noiseless 3-slave loop with fixed 30 deg reaches 95% amplitude in 200 rounds") {
    AlignmentConfig cfg;
    cfg.mode = BoundMode::Fixed;
    cfg.fixed_phi_deg = 30.0;
    cfg.smoothing = true;
    double sum = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        const auto traj = simulate_unit_loop(3, 200, cfg, BoundSchedule{}, seed);
        for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i] >= traj[i - 1]);
        sum += traj.back() / 3.0;
    }
    CHECK(sum / 100.0 >= 0.95);
}

TEST_CASE("aligner keeps phases wrapped and reverts on a worse trial") {
    AlignmentConfig cfg;
    cfg.mode = BoundMode::Fixed;
    cfg.smoothing = false;
    Aligner al(4, cfg, BoundSchedule{}, 3);
    const auto start = al.state().phases;
    auto r0 = al.alignment_round(5.0);
    CHECK(r0.improved);
    CHECK(al.state().best_phases == start);
    const auto trial = al.state().phases;
    auto r1 = al.alignment_round(4.0);
    CHECK_FALSE(r1.improved);
    CHECK(al.state().best_phases == start);
    auto r2 = al.alignment_round(5.2);
    CHECK(r2.improved);
    CHECK(al.state().best_phases != trial);
    for (double p : al.state().phases) {
        CHECK(p >= 0.0);
        CHECK(p < kTwoPi);
    }
    CHECK(al.state().y_best == 5.2);
    // Within the 1% dead band: not an improvement.
    al.alignment_round(5.23);
    CHECK(al.state().y_best == 5.2);
}

TEST_CASE("convergence is declared after a flat window") {
    AlignmentConfig cfg;
    cfg.mode = BoundMode::Fixed;
    cfg.smoothing = false;
    Aligner al(3, cfg, BoundSchedule{}, 1);
    for (int i = 0; i < 25; ++i) al.alignment_round(1.0);
    CHECK(al.converged());
    CHECK(al.converged_round() == cfg.convergence_window);
    CHECK_THROWS_AS(al.alignment_round(std::span<const double>{}), std::invalid_argument);
    CHECK_THROWS_AS(Aligner(0, cfg, BoundSchedule{}, 1), std::domain_error);
}

TEST_CASE("forgetting lets y_best decay") {
    AlignmentConfig cfg;
    cfg.mode = BoundMode::Fixed;
    cfg.smoothing = false;
    cfg.forgetting = 0.1;
    Aligner al(3, cfg, BoundSchedule{}, 1);
    al.alignment_round(10.0);
    al.alignment_round(1.0);
    CHECK(al.state().y_best == doctest::Approx(9.0));
}
