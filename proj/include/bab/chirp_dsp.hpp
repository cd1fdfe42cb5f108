#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "bab/types.hpp"

namespace bab::dsp {

struct ChirpParams {
    double bandwidth_hz = 40e3;
    double symbol_time_s = 4e-3;
    double sample_rate_hz = 2.048e6;
    double center_offset_hz = 0.0;

    // Throws std::domain_error on inconsistent values.
    void validate() const;
    std::size_t samples_per_symbol() const;
    double slope_hz_per_s() const { return bandwidth_hz / symbol_time_s; }
    // Time-bandwidth product, the matched-filter processing gain.
    double processing_gain() const { return symbol_time_s * bandwidth_hz; }
};

struct ComplexSignal {
    std::vector<cplx> samples;
    double sample_rate_hz = 0.0;

    void validate() const;
    std::size_t size() const { return samples.size(); }
    double energy() const;
    double mean_power() const;
};

struct CcsProfile {
    // values[k] = sum_m rx[m + k] * conj(ref[m]) for lags k = 0 .. rx.size() - 1
    std::vector<cplx> values;
    double zero_lag = 0.0;
    std::size_t fft_length = 0;
};

// One up-chirp symbol: instantaneous frequency center_offset - B/2 + (B/T) t.
ComplexSignal generate_chirp(const ChirpParams& p, double amplitude = 1.0, double initial_phase = 0.0);

// Back-to-back chirp symbols delayed by delay_samples (may be fractional or negative).
ComplexSignal generate_chirp_train(const ChirpParams& p, std::size_t n_samples, double delay_samples,
                                   double amplitude = 1.0, double initial_phase = 0.0);

CcsProfile ccs_correlate(const ComplexSignal& rx, const ComplexSignal& ref);
double p_ccs0(const ComplexSignal& rx, const ComplexSignal& ref);

// Reuses the reference spectrum across many receptions of the same length.
class CcsCorrelator {
public:
    CcsCorrelator(const ComplexSignal& ref, std::size_t rx_length);
    CcsProfile correlate(const ComplexSignal& rx) const;
    double p_ccs0(const ComplexSignal& rx) const;
    // Lag-0 value summed directly in the time domain; equals correlate(rx).values[0].
    cplx zero_lag(const ComplexSignal& rx) const;

private:
    std::vector<cplx> ref_;
    std::size_t rx_length_ = 0;
    std::size_t fft_length_ = 0;
    double sample_rate_hz_ = 0.0;
    std::vector<cplx> ref_spectrum_conj_;
};

// Dominant nonzero frequency of the magnitude envelope. The envelope is block-averaged
// by `decimation` samples, mean-removed and Hann-windowed before the FFT.
// Returns 0 for a flat envelope.
double fluctuation_rate(const ComplexSignal& sig, std::size_t decimation = 1);
// Bin width of the envelope spectrum used by fluctuation_rate for this signal.
double fluctuation_bin_hz(const ComplexSignal& sig, std::size_t decimation = 1);

// Per-sample complex noise variance such that the noise power inside the chirp
// bandwidth equals floor_w.
double noise_variance_for_floor(const ChirpParams& p, double floor_w);
void add_awgn(ComplexSignal& sig, double variance, std::mt19937_64& rng);
// Multiplies by exp(j 2 pi f t).
ComplexSignal mix(const ComplexSignal& sig, double freq_hz);

// Columnar dump: index,re,im
void write_signal_csv(const std::string& path, const ComplexSignal& sig);

}  // namespace bab::dsp
