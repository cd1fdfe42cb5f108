#include "bab/sync.hpp"

#include <algorithm>
#include <fstream>

namespace bab::sync {

const char* to_string(Command c) {
    switch (c) {
        case Command::AddOneSample: return "add_one_sample";
        case Command::SubOneSample: return "sub_one_sample";
        case Command::Stop: return "stop";
    }
    return "?";
}

dsp::ComplexSignal preamble_capture(const dsp::ChirpParams& chirp, std::size_t length, double delay_samples,
                                    double amplitude) {
    const auto train = dsp::generate_chirp_train(chirp, length, delay_samples, amplitude);
    const double period = static_cast<double>(chirp.samples_per_symbol());
    dsp::ComplexSignal out = train;
    for (std::size_t n = 0; n < length; ++n) {
        const double u = static_cast<double>(n) - delay_samples;
        if (u < 0.0 || u >= period) out.samples[n] = cplx{};
    }
    return out;
}

std::int64_t coarse_sync(const dsp::ComplexSignal& rx, const dsp::ComplexSignal& ref, double threshold) {
    const auto prof = dsp::ccs_correlate(rx, ref);
    const std::size_t lags = rx.size() - ref.size() + 1;
    std::vector<double> mag(lags);
    for (std::size_t k = 0; k < lags; ++k) mag[k] = std::abs(prof.values[k]);
    const auto peak_it = std::max_element(mag.begin(), mag.end());
    const double peak = *peak_it;
    const auto peak_lag = static_cast<std::int64_t>(peak_it - mag.begin());
    std::nth_element(mag.begin(), mag.begin() + lags / 2, mag.end());
    const double median = mag[lags / 2];
    if (!(peak > threshold * median))
        throw SyncError("coarse sync: no preamble correlation peak above detection threshold");
    return peak_lag;
}

dsp::ComplexSignal leader_capture(const SyncConfig& cfg, double ref_offset, double target_offset,
                                  double ref_amplitude, double target_amplitude, std::mt19937_64& rng) {
    const auto& p = cfg.chirp;
    p.validate();
    const std::size_t period = p.samples_per_symbol();
    const std::size_t dec = std::max<std::size_t>(cfg.envelope_decimation, 1);
    const std::size_t m = cfg.envelope_symbols * period / dec;
    std::uniform_real_distribution<double> uphase(0.0, kTwoPi);
    const double carrier_phase = uphase(rng);

    // Continuous (unwrapped) sweep at the symbol slope. Its product with a delayed copy
    // is a pure tone at slope * delay for every sample, so the beat persists over the
    // whole capture instead of restarting each symbol.
    const double f0 = p.center_offset_hz - 0.5 * p.bandwidth_hz;
    const double slope = p.slope_hz_per_s();
    auto chirp_at = [&](double n, double delay) {
        const double t = (n - delay) / p.sample_rate_hz;
        return kTwoPi * (f0 * t + 0.5 * slope * t * t);
    };

    dsp::ComplexSignal out;
    out.sample_rate_hz = p.sample_rate_hz / static_cast<double>(dec);
    out.samples.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double n = static_cast<double>(i * dec);
        out.samples[i] = std::polar(ref_amplitude, chirp_at(n, ref_offset)) +
                         std::polar(target_amplitude, chirp_at(n, target_offset) + carrier_phase);
    }
    // Averaging `dec` full-rate samples per envelope sample lowers the noise variance by dec.
    const double var = ref_amplitude * ref_amplitude * std::pow(10.0, -cfg.leader_snr_db / 10.0) / dec;
    dsp::add_awgn(out, var, rng);
    return out;
}

Command FineSyncPolicy::decide(double rate_hz) {
    auto step = [this] { return direction_ > 0 ? Command::AddOneSample : Command::SubOneSample; };
    if (finished_) return Command::Stop;
    if (rate_hz < threshold_hz_) {
        finished_ = true;
        return Command::Stop;
    }
    if (last_rate_ < 0.0) {
        last_rate_ = rate_hz;
        return step();
    }
    if (rate_hz > last_rate_) {
        if (reversed_) {
            finished_ = true;
            return Command::Stop;
        }
        reversed_ = true;
        direction_ = -direction_;
    }
    last_rate_ = rate_hz;
    return step();
}

Command fine_sync_round(const dsp::ComplexSignal& leader_rx, FineSyncPolicy& policy) {
    return policy.decide(dsp::fluctuation_rate(leader_rx));
}

SyncResult run_sync(const std::vector<SlaveClock>& slaves, const std::vector<double>& amplitudes,
                    const SyncConfig& cfg, std::uint64_t seed) {
    SyncResult res;
    const std::size_t n = slaves.size();
    if (n == 0) return res;
    if (amplitudes.size() != n) throw std::invalid_argument("run_sync: one amplitude per slave required");
    cfg.chirp.validate();
    std::mt19937_64 rng(mix_seed(seed, 0x5f1cULL));

    const auto ref = dsp::generate_chirp(cfg.chirp);
    const std::size_t period = cfg.chirp.samples_per_symbol();
    const std::size_t capture_len = 2 * period + period / 16;
    const double noise_var = std::pow(10.0, -cfg.preamble_snr_db / 10.0);
    std::uniform_real_distribution<double> jitter(-cfg.processing_delay_spread, cfg.processing_delay_spread);

    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto cap = preamble_capture(cfg.chirp, capture_len, slaves[i].offset_samples);
        dsp::add_awgn(cap, noise_var, rng);
        const auto est = coarse_sync(cap, ref, cfg.detect_peak_to_median);
        res.coarse_estimates.push_back(est);
        residual[i] = slaves[i].offset_samples - static_cast<double>(est) + jitter(rng);
    }
    res.residual_after_coarse.resize(n);
    res.final_residual.assign(n, 0.0);
    res.rounds.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) res.residual_after_coarse[i] = residual[i] - residual[0];

    if (n < 2) return res;
    res.periods = static_cast<int>(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        double rel = res.residual_after_coarse[i];
        std::size_t rounds = 0;
        FineSyncPolicy policy(0.0);
        bool policy_ready = false;
        while (true) {
            auto cap = leader_capture(cfg, residual[0], residual[0] + rel, amplitudes[0], amplitudes[i], rng);
            if (!policy_ready) {
                policy = FineSyncPolicy(dsp::fluctuation_bin_hz(cap));
                policy_ready = true;
            }
            const double rate = dsp::fluctuation_rate(cap);
            const Command cmd = policy.decide(rate);
            ++rounds;
            res.transcript.push_back({static_cast<int>(i), static_cast<int>(rounds), static_cast<int>(i), rel,
                                      rate, cmd});
            if (cmd == Command::Stop) break;
            rel += cmd == Command::AddOneSample ? 1.0 : -1.0;
            if (rounds >= cfg.max_fine_rounds)
                throw SyncError("fine sync: slave " + std::to_string(i) + " did not converge");
        }
        res.final_residual[i] = rel;
        res.rounds[i] = static_cast<int>(rounds);
    }
    return res;
}

void write_transcript_csv(const std::string& path, const SyncResult& r) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "period,round,slave,residual_samples,rate_hz,command\n";
    f.precision(10);
    for (const auto& t : r.transcript)
        f << t.period << ',' << t.round << ',' << t.slave << ',' << t.residual_samples << ',' << t.rate_hz << ','
          << to_string(t.command) << '\n';
}

}  // namespace bab::sync
