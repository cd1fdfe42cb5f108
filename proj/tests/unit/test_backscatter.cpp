#include <doctest.h>

#include <random>
#include <stdexcept>

#include "bab/backscatter.hpp"
#include "bab/fft.hpp"

using namespace bab;
using namespace bab::backscatter;

namespace {

dsp::ComplexSignal tone(double amplitude, std::size_t n = 4096, double fs = 2.048e6) {
    dsp::ComplexSignal s;
    s.sample_rate_hz = fs;
    s.samples.assign(n, cplx{amplitude, 0.0});
    return s;
}

}  // namespace

TEST_CASE("node wakes at the threshold and sleeps below it") {
    BackscatterNode n;
    CHECK_FALSE(n.awake);
    n = harvest_step(n, dbm_to_watts(-20.0), 1e-3);
    CHECK(n.awake);
    n = harvest_step(n, dbm_to_watts(-20.5), 1e-3);
    CHECK_FALSE(n.awake);
    CHECK(n.awake_time_s == 0.0);
    CHECK_THROWS_AS(harvest_step(n, -1.0, 1e-3), std::domain_error);
}

TEST_CASE("logic draw is about 12% of 0.37 mW harvested") {
    BackscatterNode n;
    n = harvest_step(n, 0.37e-3, 1e-3);
    n = harvest_step(n, 0.37e-3, 1e-3);
    CHECK(n.awake);
    CHECK(n.awake_time_s == doctest::Approx(2e-3));
    CHECK(n.draw_fraction() == doctest::Approx(42e-6 / 0.37e-3));
    CHECK(n.draw_fraction() > 0.11);
    CHECK(n.draw_fraction() < 0.125);
}

TEST_CASE("reflected tone lands at plus and minus the shift frequency") {
    BackscatterNode n;
    n.awake = true;
    const double fs = 2.048e6;
    const auto out = reflect(n, tone(0.1, 4096, fs));
    auto spec = out.samples;
    fft::forward(spec);
    const std::size_t k_shift = static_cast<std::size_t>(std::llround(n.shift_hz / fs * 4096));
    const double peak_pos = std::abs(spec[k_shift]);
    const double peak_neg = std::abs(spec[4096 - k_shift]);
    double rest = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k)
        if (k != k_shift && k != 4096 - k_shift) rest = std::max(rest, std::abs(spec[k]));
    CHECK(peak_pos == doctest::Approx(peak_neg).epsilon(1e-9));
    CHECK(rest < 1e-9 * peak_pos);
}

TEST_CASE("reflected power equals the transfer curve at the incident power") {
    BackscatterNode n;
    n.awake = true;
    for (double dbm : {-30.0, -20.0, -5.0, 10.0}) {
        const double p = dbm_to_watts(dbm);
        const auto out = reflect(n, tone(std::sqrt(p)));
        CHECK(out.mean_power() == doctest::Approx(n.curve.reflected_power(p)).epsilon(1e-9));
    }
    BackscatterNode asleep;
    CHECK(reflect(asleep, tone(1.0)).energy() == 0.0);
}

TEST_CASE("default curve is monotone: more in gives more out") {
    const auto c = TransferCurve::monotone_default();
    CHECK(c.is_monotone());
    double last = 0.0;
    for (double dbm = -60.0; dbm <= 30.0; dbm += 0.25) {
        const double r = c.reflected_power(dbm_to_watts(dbm));
        CHECK(r > last);
        last = r;
    }
    CHECK(c.reflected_power(dbm_to_watts(-25.0)) < c.reflected_power(dbm_to_watts(-15.0)));
}

TEST_CASE("legacy curve is flagged non-monotone") {
    const auto c = TransferCurve::legacy_nonmonotone();
    CHECK_FALSE(c.is_monotone());
    CHECK(c.reflected_power(dbm_to_watts(-15.0)) > c.reflected_power(dbm_to_watts(-5.0)));
}

TEST_CASE("curve interpolation and validation") {
    TransferCurve c{{-10.0, 0.0}, {-30.0, -34.0}};
    CHECK(c.ratio_db_at(-5.0) == doctest::Approx(-32.0));
    CHECK(c.ratio_db_at(-50.0) == -30.0);
    CHECK(c.ratio_db_at(50.0) == -34.0);
    CHECK(c.reflected_power(0.0) == 0.0);
    TransferCurve bad{{0.0, -1.0}, {-3.0, -3.0}};
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    TransferCurve active{{0.0}, {1.0}};
    CHECK_THROWS_AS(active.validate(), std::domain_error);
    TransferCurve ragged{{0.0, 1.0}, {-3.0}};
    CHECK_THROWS_AS(ragged.validate(), std::domain_error);
}

TEST_CASE("node validation enforces the shift and Nyquist rules") {
    BackscatterNode n;
    dsp::ChirpParams p;
    CHECK_NOTHROW(n.validate(p));
    n.shift_hz = 1.4 * p.bandwidth_hz;
    CHECK_THROWS_AS(n.validate(p), std::domain_error);
    n.shift_hz = 1.0e6;
    CHECK_THROWS_AS(n.validate(p), std::domain_error);
}

TEST_CASE("property: random incident pairs keep their order after reflection") {
    const auto c = TransferCurve::monotone_default();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dbm(-55.0, 25.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = dbm(rng), b = dbm(rng);
        if (a == b) continue;
        const bool in_less = a < b;
        const bool out_less = c.reflected_power(dbm_to_watts(a)) < c.reflected_power(dbm_to_watts(b));
        CHECK(in_less == out_less);
    }
}
