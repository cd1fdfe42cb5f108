#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "bab/chirp_dsp.hpp"
#include "bab/fft.hpp"

using namespace bab;
using namespace bab::dsp;

namespace {

// O(N*M) lag sum, the definition the FFT correlator must reproduce.
std::vector<cplx> brute_xcorr(const ComplexSignal& rx, const ComplexSignal& ref) {
    std::vector<cplx> out(rx.size());
    for (std::size_t k = 0; k < rx.size(); ++k) {
        cplx acc{};
        for (std::size_t m = 0; m < ref.size() && m + k < rx.size(); ++m) acc += rx.samples[m + k] * std::conj(ref.samples[m]);
        out[k] = acc;
    }
    return out;
}

// Two unwrapped chirps of equal amplitude, the second delayed by tau.
ComplexSignal two_chirps(const ChirpParams& p, double tau_s, std::size_t symbols) {
    ComplexSignal s;
    s.sample_rate_hz = p.sample_rate_hz;
    const std::size_t n = p.samples_per_symbol() * symbols;
    s.samples.resize(n);
    const double k = p.slope_hz_per_s();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = i / p.sample_rate_hz;
        const double a = kPi * k * t * t;
        const double b = kPi * k * (t - tau_s) * (t - tau_s);
        s.samples[i] = std::polar(1.0, a) + std::polar(1.0, b);
    }
    return s;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST_CASE("default chirp has 8192 samples per symbol and a time-bandwidth gain of 160") {
    ChirpParams p;
    CHECK(p.samples_per_symbol() == 8192);
    CHECK(p.processing_gain() == doctest::Approx(160.0));
    CHECK(p.slope_hz_per_s() == doctest::Approx(1e7));
    ChirpParams wide = p;
    wide.bandwidth_hz *= 2.0;
    CHECK(wide.processing_gain() == doctest::Approx(2.0 * p.processing_gain()));
}

TEST_CASE("chirp parameter validation") {
    ChirpParams p;
    p.sample_rate_hz = 50e3;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    p = ChirpParams{};
    p.symbol_time_s = 1.0000001e-3 / 3.0;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    p = ChirpParams{};
    p.symbol_time_s = 0.0;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
}

TEST_CASE("generated chirp follows the quadratic phase law") {
    ChirpParams p;
    p.center_offset_hz = 5e3;
    const auto c = generate_chirp(p, 2.0, 0.3);
    REQUIRE(c.size() == 8192);
    for (std::size_t n : {0ul, 1ul, 100ul, 4095ul, 8191ul}) {
        const double t = n / p.sample_rate_hz;
        const double ph = 2.0 * kPi * ((5e3 - 20e3) * t + 0.5 * 1e7 * t * t) + 0.3;
        const cplx want = std::polar(2.0, ph);
        CHECK(std::abs(c.samples[n] - want) < 1e-9);
    }
    CHECK(c.mean_power() == doctest::Approx(4.0));
}

TEST_CASE("chirp train repeats the symbol and honours delay") {
    ChirpParams p;
    const auto sym = generate_chirp(p);
    const auto train = generate_chirp_train(p, 3 * 8192, 0.0);
    for (std::size_t n = 0; n < 8192; n += 97) {
        CHECK(std::abs(train.samples[n + 8192] - sym.samples[n]) < 1e-9);
        CHECK(std::abs(train.samples[n + 2 * 8192] - sym.samples[n]) < 1e-9);
    }
    const auto delayed = generate_chirp_train(p, 8192, 100.0);
    CHECK(std::abs(delayed.samples[100] - sym.samples[0]) < 1e-9);
    CHECK(std::abs(delayed.samples[50] - sym.samples[8192 - 50]) < 1e-9);
}

TEST_CASE("FFT correlation matches the brute-force lag sum") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (std::size_t len : {17ul, 64ul, 150ul}) {
        ComplexSignal ref, rx;
        ref.sample_rate_hz = rx.sample_rate_hz = 1e3;
        for (std::size_t i = 0; i < len / 2; ++i) ref.samples.emplace_back(n01(rng), n01(rng));
        for (std::size_t i = 0; i < len; ++i) rx.samples.emplace_back(n01(rng), n01(rng));
        const auto prof = ccs_correlate(rx, ref);
        const auto oracle = brute_xcorr(rx, ref);
        REQUIRE(prof.values.size() == oracle.size());
        for (std::size_t k = 0; k < oracle.size(); ++k) CHECK(std::abs(prof.values[k] - oracle[k]) < 1e-9);
        CHECK(prof.zero_lag == doctest::Approx(std::abs(oracle[0])));
        CHECK(prof.zero_lag >= 0.0);
    }
}

TEST_CASE("time-domain zero lag equals the FFT zero lag") {
    ChirpParams p;
    const auto ref = generate_chirp(p);
    auto rx = generate_chirp(p, 0.7, 1.1);
    std::mt19937_64 rng(3);
    add_awgn(rx, 0.5, rng);
    CcsCorrelator corr(ref, rx.size());
    const cplx direct = corr.zero_lag(rx);
    const auto prof = corr.correlate(rx);
    CHECK(std::abs(direct - prof.values[0]) < 1e-7 * std::abs(direct));
    CHECK(corr.p_ccs0(rx) == doctest::Approx(std::abs(direct)).epsilon(1e-10));
    CHECK(p_ccs0(rx, ref) == doctest::Approx(std::abs(direct)).epsilon(1e-10));
}

TEST_CASE("aligned chirp peaks at lag zero with amplitude times length") {
    ChirpParams p;
    const auto ref = generate_chirp(p);
    const auto rx = generate_chirp(p, 0.25);
    const auto prof = ccs_correlate(rx, ref);
    CHECK(prof.zero_lag == doctest::Approx(0.25 * 8192).epsilon(1e-9));
    double best = 0.0;
    for (std::size_t k = 1; k < prof.values.size(); ++k) best = std::max(best, std::abs(prof.values[k]));
    CHECK(best < prof.zero_lag);
}

TEST_CASE("correlator rejects mismatched inputs") {
    ChirpParams p;
    const auto ref = generate_chirp(p);
    CcsCorrelator corr(ref, ref.size());
    ComplexSignal shorter = ref;
    shorter.samples.pop_back();
    CHECK_THROWS_AS(corr.correlate(shorter), std::domain_error);
    ComplexSignal other_rate = ref;
    other_rate.sample_rate_hz *= 2.0;
    CHECK_THROWS_AS(corr.correlate(other_rate), std::domain_error);
    CHECK_THROWS_AS(CcsCorrelator(ref, ref.size() - 1), std::domain_error);
}

TEST_CASE("noise calibration puts the floor inside the chirp bandwidth") {
    ChirpParams p;
    const double floor_w = 1e-10;
    const double var = noise_variance_for_floor(p, floor_w);
    CHECK(var * p.bandwidth_hz / p.sample_rate_hz == doctest::Approx(floor_w));
    ComplexSignal s;
    s.sample_rate_hz = p.sample_rate_hz;
    s.samples.assign(1 << 16, cplx{});
    std::mt19937_64 rng(9);
    add_awgn(s, var, rng);
    CHECK(s.mean_power() == doctest::Approx(var).epsilon(0.02));
    // In-band power measured from the spectrum.
    auto spectrum = s.samples;
    fft::forward(spectrum);
    const double df = p.sample_rate_hz / spectrum.size();
    double inband = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double f = (k < spectrum.size() / 2 ? k : static_cast<double>(k) - spectrum.size()) * df;
        if (std::abs(f) <= 0.5 * p.bandwidth_hz) inband += std::norm(spectrum[k]);
    }
    inband /= static_cast<double>(spectrum.size()) * spectrum.size();
    CHECK(inband == doctest::Approx(floor_w).epsilon(0.05));
}

TEST_CASE("pure noise zero lag concentrates at the Rayleigh mean") {
    ChirpParams p;
    const auto ref = generate_chirp(p);
    CcsCorrelator corr(ref, ref.size());
    const double var = 1.0;
    std::mt19937_64 rng(21);
    double sum = 0.0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        ComplexSignal s;
        s.sample_rate_hz = p.sample_rate_hz;
        s.samples.assign(ref.size(), cplx{});
        add_awgn(s, var, rng);
        sum += corr.p_ccs0(s);
    }
    // |CN(0, K var)| has mean sqrt(pi K var / 4).
    const double expected = std::sqrt(kPi * ref.size() * var / 4.0);
    CHECK(sum / trials == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("mean P_CCS(0) increases with embedded amplitude") {
    ChirpParams p;
    const auto ref = generate_chirp(p);
    CcsCorrelator corr(ref, ref.size());
    std::vector<double> amps, means;
    for (int i = 0; i < 20; ++i) {
        const double a = 0.005 * i;
        double acc = 0.0;
        for (int seed = 0; seed < 30; ++seed) {
            auto rx = generate_chirp(p, a);
            std::mt19937_64 rng(mix_seed(seed, 77));
            add_awgn(rx, 1.0, rng);
            acc += corr.p_ccs0(rx);
        }
        amps.push_back(a);
        means.push_back(acc / 30.0);
    }
    CHECK(spearman(amps, means) == doctest::Approx(1.0));
}

TEST_CASE("mixing shifts the spectrum by the mix frequency") {
    ComplexSignal tone;
    tone.sample_rate_hz = 1024.0;
    tone.samples.assign(1024, cplx{1.0, 0.0});
    const auto shifted = mix(tone, 100.0);
    auto spectrum = shifted.samples;
    fft::forward(spectrum);
    std::size_t best = 0;
    for (std::size_t k = 0; k < spectrum.size(); ++k)
        if (std::abs(spectrum[k]) > std::abs(spectrum[best])) best = k;
    CHECK(best == 100);
}

TEST_CASE("beat rate of two delayed chirps is slope times delay") {
    ChirpParams p;
    const double r50 = fluctuation_rate(two_chirps(p, 50e-6, 16), 64);
    const double r25 = fluctuation_rate(two_chirps(p, 25e-6, 16), 64);
    CHECK(r50 == doctest::Approx(500.0).epsilon(0.01));
    CHECK(r25 == doctest::Approx(250.0).epsilon(0.01));
    CHECK(r25 < r50);
    CHECK(fluctuation_rate(two_chirps(p, 0.0, 16), 64) == 0.0);
}

TEST_CASE("property: fluctuation rate is linear in delay") {
    ChirpParams p;
    for (double samples : {7.0, 12.0, 40.0, 100.0}) {  // at least two beat cycles in the window
        const double tau = samples / p.sample_rate_hz;
        const double rate = fluctuation_rate(two_chirps(p, tau, 16), 64);
        CHECK(rate == doctest::Approx(p.slope_hz_per_s() * tau).epsilon(0.02));
    }
}

TEST_CASE("fluctuation rate input checks") {
    ComplexSignal s;
    s.sample_rate_hz = 1e3;
    s.samples.assign(8, cplx{1.0, 0.0});
    CHECK_THROWS_AS(fluctuation_rate(s, 4), std::domain_error);
    CHECK_THROWS_AS(fluctuation_rate(s, 0), std::domain_error);
    CHECK(fluctuation_rate(s, 1) == 0.0);
}
