#include "bab/backscatter.hpp"

#include <algorithm>
#include <stdexcept>

namespace bab::backscatter {

TransferCurve TransferCurve::monotone_default() {
    // Logistic compression in the dB domain: about 30 dB conversion loss at low drive,
    // easing to 38 dB when the rectifier saturates around 0 dBm.
    TransferCurve c;
    for (double p = -50.0; p <= 20.0 + 1e-9; p += 5.0) {
        c.input_dbm.push_back(p);
        c.ratio_db.push_back(-30.0 - 8.0 / (1.0 + std::exp(-p / 5.0)));
    }
    return c;
}

TransferCurve TransferCurve::legacy_nonmonotone() {
    // Reflection collapses once the chip draws current, as in RFID-style tags.
    return {{-50.0, -15.0, -5.0, 5.0, 20.0}, {-30.0, -30.0, -45.0, -45.0, -48.0}};
}

TransferCurve TransferCurve::constant(double ratio_db) { return {{0.0}, {ratio_db}}; }

double TransferCurve::ratio_db_at(double in_dbm) const {
    if (input_dbm.empty()) throw std::domain_error("transfer curve: no anchors");
    if (in_dbm <= input_dbm.front()) return ratio_db.front();
    if (in_dbm >= input_dbm.back()) return ratio_db.back();
    const auto it = std::upper_bound(input_dbm.begin(), input_dbm.end(), in_dbm);
    const std::size_t i = static_cast<std::size_t>(it - input_dbm.begin());
    const double x0 = input_dbm[i - 1], x1 = input_dbm[i];
    const double w = (in_dbm - x0) / (x1 - x0);
    return ratio_db[i - 1] + w * (ratio_db[i] - ratio_db[i - 1]);
}

double TransferCurve::reflected_power(double incident_w) const {
    if (!(incident_w > 0.0)) return 0.0;
    return incident_w * std::pow(10.0, ratio_db_at(watts_to_dbm(incident_w)) / 10.0);
}

bool TransferCurve::is_monotone() const {
    for (std::size_t i = 1; i < input_dbm.size(); ++i) {
        const double slope = (ratio_db[i] - ratio_db[i - 1]) / (input_dbm[i] - input_dbm[i - 1]);
        if (!(slope > -1.0)) return false;
    }
    return true;
}

void TransferCurve::validate() const {
    if (input_dbm.empty() || input_dbm.size() != ratio_db.size())
        throw std::domain_error("transfer curve: anchor lists empty or of different length");
    for (std::size_t i = 0; i < input_dbm.size(); ++i) {
        if (!std::isfinite(input_dbm[i]) || !std::isfinite(ratio_db[i]))
            throw std::domain_error("transfer curve: non-finite anchor");
        if (ratio_db[i] > 0.0) throw std::domain_error("transfer curve: ratio above 0 dB is not passive");
        if (i > 0 && !(input_dbm[i] > input_dbm[i - 1]))
            throw std::domain_error("transfer curve: input anchors must be strictly increasing");
    }
}

void BackscatterNode::validate(const dsp::ChirpParams& chirp) const {
    curve.validate();
    if (!(shift_hz > 1.5 * chirp.bandwidth_hz))
        throw std::domain_error("backscatter: shift frequency must exceed 1.5x chirp bandwidth");
    if (shift_hz + chirp.bandwidth_hz + std::abs(chirp.center_offset_hz) >= 0.5 * chirp.sample_rate_hz)
        throw std::domain_error("backscatter: shifted band exceeds Nyquist");
    if (!(dynamic_power_draw_w >= 0.0)) throw std::domain_error("backscatter: negative power draw");
}

double BackscatterNode::draw_fraction() const {
    return last_incident_w > 0.0 ? dynamic_power_draw_w / last_incident_w : 0.0;
}

BackscatterNode harvest_step(BackscatterNode node, double incident_w, double dt_s) {
    if (!(incident_w >= 0.0)) throw std::domain_error("harvest_step: negative incident power");
    node.last_incident_w = incident_w;
    node.awake = incident_w >= dbm_to_watts(node.wake_threshold_dbm) * (1.0 - 1e-12);
    node.awake_time_s = node.awake ? node.awake_time_s + dt_s : 0.0;
    return node;
}

dsp::ComplexSignal reflect(const BackscatterNode& node, const dsp::ComplexSignal& incident) {
    dsp::ComplexSignal out;
    out.sample_rate_hz = incident.sample_rate_hz;
    out.samples.assign(incident.size(), cplx{});
    if (!node.awake) return out;
    const double p_in = incident.mean_power();
    if (!(p_in > 0.0)) return out;
    const double scale = std::sqrt(2.0 * node.curve.reflected_power(p_in) / p_in);
    const double w = kTwoPi * node.shift_hz / incident.sample_rate_hz;
    for (std::size_t n = 0; n < incident.size(); ++n)
        out.samples[n] = scale * std::cos(std::fmod(w * n, kTwoPi)) * incident.samples[n];
    return out;
}

}  // namespace bab::backscatter
