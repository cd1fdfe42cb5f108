#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bab/backscatter.hpp"
#include "bab/beamform.hpp"
#include "bab/channel.hpp"
#include "bab/chirp_dsp.hpp"
#include "bab/coldstart.hpp"
#include "bab/sync.hpp"

namespace bab {

// Generator for slave positions; kind "explicit" uses `positions` as given.
struct SlaveLayout {
    std::string kind = "ceiling_grid";  // ceiling_grid | ring | linear | explicit
    int count = 24;
    Position center{9.0, 9.0, 0.0};
    double extent_m = 18.0;   // ceiling_grid: side of the covered square
    double height_m = 3.0;    // ceiling_grid / ring: z of the antennas
    double radius_m = 3.0;    // ring
    double spacing_m = 0.1639344262295082;  // linear: half a wavelength at 915 MHz
    double bearing_deg = 0.0;               // linear: array axis direction in the x-y plane
    std::vector<Position> positions;        // explicit

    std::vector<Position> generate() const;
    bool operator==(const SlaveLayout&) const = default;
};

struct TrajectoryPoint {
    double time_s = 0.0;
    Position position;
    double speed_mps = 0.0;
};

// Back-and-forth motion along a polyline at constant speed.
struct Mobility {
    bool enabled = false;
    double speed_mps = 0.0;
    double duration_s = 0.0;
    std::vector<Position> waypoints;

    std::vector<TrajectoryPoint> trajectory() const;
    bool operator==(const Mobility&) const = default;
};

enum class Baseline { None, RandomPhase };

// How the leader's zero-lag statistic gets its noise. Waveform adds AWGN to every
// sample; Projected draws the projection of that AWGN onto the unit-modulus reference,
// which has the same distribution, in one complex normal draw.
enum class NoiseModel { Waveform, Projected };

struct RadioConfig {
    double tx_power_dbm = 30.0;
    double tx_gain_dbi = 4.0;
    double noise_floor_dbm = -70.0;  // in the chirp bandwidth
    bool rayleigh = false;
    double rayleigh_scale = 0.3;
    int symbols_per_measurement = 256;
    double feedback_latency_s = 1e-3;
    double detection_pfa = 1e-3;
    NoiseModel noise_model = NoiseModel::Projected;
    bool operator==(const RadioConfig&) const = default;
};

struct SyncStage {
    bool enabled = true;
    double max_offset_samples = 8192.0;
    sync::SyncConfig config;
};

struct ColdStartStage {
    bool enabled = true;
    coldstart::ColdStartConfig config;
};

struct AlignmentStage {
    int rounds = 300;
    beamform::AlignmentConfig config;
    int metrics_window = 50;
};

struct HeatmapSpec {
    bool enabled = false;
    Position center;
    double width_m = 2.0;
    double depth_m = 2.0;
    double voxel_m = 0.05;
    bool operator==(const HeatmapSpec&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    SlaveLayout layout;
    std::vector<Position> slaves;
    Position leader{9.5, 9.0, 1.0};
    backscatter::BackscatterNode node;
    channel::MediumMap medium;
    dsp::ChirpParams chirp;
    RadioConfig radio;
    SyncStage sync;
    ColdStartStage cold_start;
    AlignmentStage alignment;
    Mobility mobility;
    Baseline baseline = Baseline::None;
    HeatmapSpec heatmap;

    // Regenerates slave positions from the layout.
    void apply_layout();
    // Throws std::domain_error describing the first inconsistency.
    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// JSON with unit-suffixed keys. Parse errors name the line/column or the field path.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);
bool same_scenario(const Scenario& a, const Scenario& b);

// A slab of muscle `thickness` thick whose top face is at z = top_z, centred on (x, y).
channel::TissueBlock tissue_slab(Position center_top, double width_m, double thickness_m);

namespace presets {
// Node 2 cm under the top of a 10 cm slab; slaves on a ring 2 m away.
Scenario tissue_ring(int n_slaves, double ring_radius_m = 2.0);
// tissue_ring with a 1 m long slab; the node moves back and forth 80 cm along it.
Scenario tissue_mobile(int n_slaves, double speed_mps);
// Ceiling grid over 18 x 18 m, node in tissue on a desk.
Scenario testbed(int n_slaves);
}  // namespace presets

}  // namespace bab
