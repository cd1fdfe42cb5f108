#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bab/chirp_dsp.hpp"

namespace bab::sync {

enum class Command { AddOneSample, SubOneSample, Stop };

const char* to_string(Command c);

struct SlaveClock {
    double offset_samples = 0.0;  // integer + fractional samples relative to the leader epoch
};

class SyncError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SyncConfig {
    dsp::ChirpParams chirp;
    double preamble_snr_db = 0.0;               // per-sample SNR of the leader preamble at a slave
    double detect_peak_to_median = 8.0;         // coarse detection threshold on |corr|
    double processing_delay_spread = 170.0;     // +- samples of unknown per-slave turnaround delay
    std::size_t envelope_symbols = 64;          // leader observation window per fine round
    std::size_t envelope_decimation = 64;       // leader samples the envelope at fs / decimation
    double leader_snr_db = 30.0;                // per-sample SNR of each slave carrier at the leader
    std::size_t max_fine_rounds = 2000;
};

// Capture window with one preamble symbol starting at delay_samples.
dsp::ComplexSignal preamble_capture(const dsp::ChirpParams& chirp, std::size_t length, double delay_samples,
                                    double amplitude = 1.0);

// Lag of the correlation peak. Throws SyncError when peak/median is below the threshold.
std::int64_t coarse_sync(const dsp::ComplexSignal& slave_rx_preamble, const dsp::ComplexSignal& ref_chirp,
                         double peak_to_median_threshold = 8.0);

// What the leader hears while the reference slave and the target transmit together,
// sampled at fs / decimation. Offsets are residuals in samples at the full rate.
dsp::ComplexSignal leader_capture(const SyncConfig& cfg, double ref_offset, double target_offset,
                                  double ref_amplitude, double target_amplitude, std::mt19937_64& rng);

// Leader-side greedy walk for one slave: first try +1 sample, reverse once if the
// fluctuation rate grew, stop when the rate is under the threshold or grows again.
class FineSyncPolicy {
public:
    explicit FineSyncPolicy(double threshold_hz) : threshold_hz_(threshold_hz) {}
    Command decide(double rate_hz);
    bool finished() const { return finished_; }

private:
    double threshold_hz_;
    double last_rate_ = -1.0;
    int direction_ = +1;
    bool reversed_ = false;
    bool finished_ = false;
};

// Convenience wrapper: measures the rate in leader_rx and feeds the policy.
Command fine_sync_round(const dsp::ComplexSignal& leader_rx, FineSyncPolicy& policy);

struct TranscriptRow {
    int period = 0;
    int round = 0;
    int slave = 0;
    double residual_samples = 0.0;
    double rate_hz = 0.0;
    Command command = Command::Stop;
};

struct SyncResult {
    std::vector<std::int64_t> coarse_estimates;
    std::vector<double> residual_after_coarse;  // relative to slave 0
    std::vector<double> final_residual;         // relative to slave 0
    std::vector<int> rounds;                    // fine rounds per slave, Stop included
    std::vector<TranscriptRow> transcript;
    int periods = 0;
};

// Slave 0 is the reference. Each later slave is walked into alignment with it in
// its own period. Amplitudes are the carrier amplitudes seen at the leader.
SyncResult run_sync(const std::vector<SlaveClock>& slaves, const std::vector<double>& amplitudes,
                    const SyncConfig& cfg, std::uint64_t seed);

void write_transcript_csv(const std::string& path, const SyncResult& r);

}  // namespace bab::sync
