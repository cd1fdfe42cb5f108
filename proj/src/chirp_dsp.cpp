#include "bab/chirp_dsp.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "bab/fft.hpp"

namespace bab::dsp {

void ChirpParams::validate() const {
    if (!(bandwidth_hz >= 0.0) || !(symbol_time_s > 0.0) || !(sample_rate_hz > 0.0) ||
        !std::isfinite(center_offset_hz))
        throw std::domain_error("chirp: bandwidth >= 0, symbol time > 0 and sample rate > 0 required");
    if (sample_rate_hz < 2.0 * (bandwidth_hz + std::abs(center_offset_hz)))
        throw std::domain_error("chirp: sample rate below 2*(bandwidth + |center offset|)");
    const double n = symbol_time_s * sample_rate_hz;
    if (n < 1.0 || std::abs(n - std::round(n)) > 1e-6)
        throw std::domain_error("chirp: symbol_time * sample_rate must be a positive integer");
}

std::size_t ChirpParams::samples_per_symbol() const {
    return static_cast<std::size_t>(std::llround(symbol_time_s * sample_rate_hz));
}

void ComplexSignal::validate() const {
    if (samples.empty()) throw std::domain_error("signal: empty");
    if (!(sample_rate_hz > 0.0)) throw std::domain_error("signal: sample rate must be positive");
    for (const auto& s : samples)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::domain_error("signal: non-finite sample");
}

double ComplexSignal::energy() const {
    double e = 0.0;
    for (const auto& s : samples) e += std::norm(s);
    return e;
}

double ComplexSignal::mean_power() const { return samples.empty() ? 0.0 : energy() / samples.size(); }

namespace {

double chirp_phase(const ChirpParams& p, double t) {
    const double f0 = p.center_offset_hz - 0.5 * p.bandwidth_hz;
    return kTwoPi * (f0 * t + 0.5 * p.slope_hz_per_s() * t * t);
}

}  // namespace

ComplexSignal generate_chirp(const ChirpParams& p, double amplitude, double initial_phase) {
    return generate_chirp_train(p, p.samples_per_symbol(), 0.0, amplitude, initial_phase);
}

ComplexSignal generate_chirp_train(const ChirpParams& p, std::size_t n_samples, double delay_samples,
                                   double amplitude, double initial_phase) {
    p.validate();
    if (!(amplitude >= 0.0)) throw std::domain_error("chirp: negative amplitude");
    ComplexSignal out;
    out.sample_rate_hz = p.sample_rate_hz;
    out.samples.resize(n_samples);
    const double period = static_cast<double>(p.samples_per_symbol());
    for (std::size_t n = 0; n < n_samples; ++n) {
        double u = std::fmod(static_cast<double>(n) - delay_samples, period);
        if (u < 0.0) u += period;
        const double t = u / p.sample_rate_hz;
        out.samples[n] = std::polar(amplitude, chirp_phase(p, t) + initial_phase);
    }
    return out;
}

CcsCorrelator::CcsCorrelator(const ComplexSignal& ref, std::size_t rx_length)
    : ref_(ref.samples), rx_length_(rx_length), sample_rate_hz_(ref.sample_rate_hz) {
    ref.validate();
    if (rx_length < ref.size()) throw std::domain_error("ccs: rx shorter than reference");
    fft_length_ = fft::next_pow2(rx_length + ref.size() - 1);
    ref_spectrum_conj_.assign(fft_length_, cplx{});
    std::copy(ref.samples.begin(), ref.samples.end(), ref_spectrum_conj_.begin());
    fft::forward(ref_spectrum_conj_);
    for (auto& v : ref_spectrum_conj_) v = std::conj(v);
}

CcsProfile CcsCorrelator::correlate(const ComplexSignal& rx) const {
    if (rx.sample_rate_hz != sample_rate_hz_) throw std::domain_error("ccs: sample rate mismatch");
    if (rx.size() != rx_length_) throw std::domain_error("ccs: rx length differs from planned length");
    std::vector<cplx> buf(fft_length_, cplx{});
    std::copy(rx.samples.begin(), rx.samples.end(), buf.begin());
    fft::forward(buf);
    for (std::size_t k = 0; k < fft_length_; ++k) buf[k] *= ref_spectrum_conj_[k];
    fft::inverse(buf);
    CcsProfile prof;
    prof.fft_length = fft_length_;
    prof.values.resize(rx_length_);
    const double scale = 1.0 / static_cast<double>(fft_length_);
    for (std::size_t k = 0; k < rx_length_; ++k) prof.values[k] = buf[k] * scale;
    prof.zero_lag = std::abs(prof.values[0]);
    return prof;
}

double CcsCorrelator::p_ccs0(const ComplexSignal& rx) const { return correlate(rx).zero_lag; }

cplx CcsCorrelator::zero_lag(const ComplexSignal& rx) const {
    if (rx.size() != rx_length_) throw std::domain_error("ccs: rx length differs from planned length");
    double re = 0.0, im = 0.0;
    for (std::size_t m = 0; m < ref_.size(); ++m) {
        const double a = rx.samples[m].real(), b = rx.samples[m].imag();
        const double c = ref_[m].real(), d = ref_[m].imag();
        re += a * c + b * d;
        im += b * c - a * d;
    }
    return {re, im};
}

CcsProfile ccs_correlate(const ComplexSignal& rx, const ComplexSignal& ref) {
    if (rx.sample_rate_hz != ref.sample_rate_hz) throw std::domain_error("ccs: sample rate mismatch");
    rx.validate();
    return CcsCorrelator(ref, rx.size()).correlate(rx);
}

double p_ccs0(const ComplexSignal& rx, const ComplexSignal& ref) { return ccs_correlate(rx, ref).zero_lag; }

namespace {

std::vector<double> envelope(const ComplexSignal& sig, std::size_t decimation) {
    if (decimation == 0) throw std::domain_error("fluctuation_rate: decimation must be >= 1");
    const std::size_t m = sig.size() / decimation;
    if (m < 4) throw std::domain_error("fluctuation_rate: envelope too short");
    std::vector<double> env(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < decimation; ++j) acc += std::abs(sig.samples[i * decimation + j]);
        env[i] = acc / decimation;
    }
    return env;
}

// Residual energy of the least-squares fit env ~ c0 + c1 cos(w i) + c2 sin(w i).
double tone_fit_residual(const std::vector<double>& env, double w) {
    // Plain-double recurrence for cos/sin; std::complex multiply is not inlined.
    const double cw = std::cos(w), sw = std::sin(w);
    double c = 1.0, sn = 0.0;
    double s1 = 0, sc = 0, ss = 0, scc = 0, scs = 0, sss = 0, by = 0, bc = 0, bs = 0, bb = 0;
    for (const double y : env) {
        s1 += 1.0;
        sc += c;
        ss += sn;
        scc += c * c;
        scs += c * sn;
        sss += sn * sn;
        by += y;
        bc += c * y;
        bs += sn * y;
        bb += y * y;
        const double nc = c * cw - sn * sw;
        sn = sn * cw + c * sw;
        c = nc;
    }
    Eigen::Matrix3d ata;
    ata << s1, sc, ss, sc, scc, scs, ss, scs, sss;
    const Eigen::Vector3d atb(by, bc, bs);
    const Eigen::Vector3d coef = ata.ldlt().solve(atb);
    return bb - coef.dot(atb);
}

}  // namespace

double fluctuation_bin_hz(const ComplexSignal& sig, std::size_t decimation) {
    const std::size_t m = sig.size() / std::max<std::size_t>(decimation, 1);
    return sig.sample_rate_hz / decimation / static_cast<double>(fft::next_pow2(m));
}

double fluctuation_rate(const ComplexSignal& sig, std::size_t decimation) {
    if (!(sig.sample_rate_hz > 0.0)) throw std::domain_error("fluctuation_rate: bad sample rate");
    std::vector<double> env = envelope(sig, decimation);
    const std::size_t m = env.size();
    double mean = 0.0;
    for (double v : env) mean += v;
    mean /= m;
    double spread = 0.0;
    for (double v : env) spread = std::max(spread, std::abs(v - mean));
    if (spread <= 1e-9 * std::max(mean, 1e-300)) return 0.0;

    const std::size_t len = fft::next_pow2(m);
    std::vector<cplx> buf(len, cplx{});
    for (std::size_t i = 0; i < m; ++i) {
        const double w = 0.5 - 0.5 * std::cos(kTwoPi * i / (m - 1));
        buf[i] = (env[i] - mean) * w;
    }
    fft::forward(buf);
    std::size_t best = 1;
    double best_mag = -1.0;
    for (std::size_t k = 1; k <= len / 2; ++k) {
        const double a = std::abs(buf[k]);
        if (a > best_mag) {
            best_mag = a;
            best = k;
        }
    }
    double frac = 0.0;
    if (best + 1 <= len / 2) {
        const double a = std::abs(buf[best - 1]), b = best_mag, c = std::abs(buf[best + 1]);
        const double den = a - 2.0 * b + c;
        if (den < 0.0) frac = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
    }
    const double fs_env = sig.sample_rate_hz / decimation;
    const double coarse = (best + frac) / static_cast<double>(len);  // cycles per envelope sample

    // With only a cycle or two in the window the windowed peak is biased toward bin 1.
    // Refine by a golden-section search of the single-tone fit over +-1.5 bins.
    for (double& v : env) v -= mean;  // keeps the residual well conditioned
    const double bin = 1.0 / static_cast<double>(m);
    double lo = std::max(0.05 * bin, coarse - 1.5 * bin), hi = std::min(0.5, coarse + 1.5 * bin);
    if (!(hi > lo)) return coarse * fs_env;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double r1 = tone_fit_residual(env, kTwoPi * x1), r2 = tone_fit_residual(env, kTwoPi * x2);
    for (int it = 0; it < 32; ++it) {
        if (r1 < r2) {
            hi = x2;
            x2 = x1;
            r2 = r1;
            x1 = hi - g * (hi - lo);
            r1 = tone_fit_residual(env, kTwoPi * x1);
        } else {
            lo = x1;
            x1 = x2;
            r1 = r2;
            x2 = lo + g * (hi - lo);
            r2 = tone_fit_residual(env, kTwoPi * x2);
        }
    }
    return 0.5 * (lo + hi) * fs_env;
}

double noise_variance_for_floor(const ChirpParams& p, double floor_w) {
    p.validate();
    if (!(p.bandwidth_hz > 0.0)) throw std::domain_error("noise: chirp bandwidth must be positive");
    return floor_w * p.sample_rate_hz / p.bandwidth_hz;
}

void add_awgn(ComplexSignal& sig, double variance, std::mt19937_64& rng) {
    if (!(variance >= 0.0)) throw std::domain_error("awgn: negative variance");
    if (variance == 0.0) return;
    std::normal_distribution<double> n01(0.0, std::sqrt(0.5 * variance));
    for (auto& s : sig.samples) {
        const double re = n01(rng);
        const double im = n01(rng);
        s += cplx(re, im);
    }
}

ComplexSignal mix(const ComplexSignal& sig, double freq_hz) {
    ComplexSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.resize(sig.size());
    const double w = kTwoPi * freq_hz / sig.sample_rate_hz;
    for (std::size_t n = 0; n < sig.size(); ++n)
        out.samples[n] = sig.samples[n] * std::polar(1.0, std::fmod(w * n, kTwoPi));
    return out;
}

void write_signal_csv(const std::string& path, const ComplexSignal& sig) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "index,re,im\n";
    f.precision(17);
    for (std::size_t n = 0; n < sig.size(); ++n)
        f << n << ',' << sig.samples[n].real() << ',' << sig.samples[n].imag() << '\n';
}

}  // namespace bab::dsp
