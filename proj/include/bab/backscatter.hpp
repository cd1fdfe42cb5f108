#pragma once

#include <vector>

#include "bab/chirp_dsp.hpp"
#include "bab/types.hpp"

namespace bab::backscatter {

// Reflection transfer curve: reflected power = P_in * ratio(P_in)^2, where the
// amplitude ratio is tabulated in dB against input power in dBm. Piecewise linear
// in dB between anchors, flat outside.
struct TransferCurve {
    std::vector<double> input_dbm;
    std::vector<double> ratio_db;

    static TransferCurve monotone_default();
    static TransferCurve legacy_nonmonotone();
    // Constant conversion loss; reflected power is then proportional to input.
    static TransferCurve constant(double ratio_db = -30.0);

    double ratio_db_at(double in_dbm) const;
    double reflected_power(double incident_w) const;
    // Strictly increasing output power everywhere (slope of ratio_db > -1 between anchors).
    bool is_monotone() const;
    // Sorted anchors, finite values, passive (ratio <= 0 dB). Throws std::domain_error.
    void validate() const;
};

struct BackscatterNode {
    Position position;
    double wake_threshold_dbm = -20.0;
    double shift_hz = 100e3;
    TransferCurve curve = TransferCurve::monotone_default();
    bool awake = false;
    double dynamic_power_draw_w = 42e-6;
    double last_incident_w = 0.0;
    double awake_time_s = 0.0;

    // Needs shift > 1.5 * chirp bandwidth and both sidebands below Nyquist.
    void validate(const dsp::ChirpParams& chirp) const;
    // Fraction of the last incident power consumed by the node's logic.
    double draw_fraction() const;
};

BackscatterNode harvest_step(BackscatterNode node, double incident_w, double dt_s);

// Mixes the incident waveform with cos(2 pi f_s t) after scaling so that the total
// output power equals curve(incident mean power). Asleep nodes return silence.
dsp::ComplexSignal reflect(const BackscatterNode& node, const dsp::ComplexSignal& incident);

}  // namespace bab::backscatter
