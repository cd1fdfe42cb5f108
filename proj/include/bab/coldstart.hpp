#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "bab/field.hpp"

namespace bab::coldstart {

struct ColdStartConfig {
    double sigma_deg = 55.0;
    double cube_edge_m = 2.0;
    double voxel_m = 0.05;
    int max_perturbations = 100;
    double wake_power_floor = 0.30;  // fraction of the per-voxel coherent optimum

    void validate() const;
};

// Phases that make every link arrive at the target with zero phase.
std::vector<double> focus_phases(const std::vector<cplx>& h_to_target);

// Independent uniform offsets in (-sigma, sigma) around the base phases.
std::vector<double> perturbation_round(const std::vector<double>& base, double sigma_rad, std::mt19937_64& rng);

struct ScanResult {
    std::vector<double> ratio_by_round;  // entry r: after base beam + r perturbations
    std::vector<double> cumulative_max;  // per voxel
    double ratio() const { return ratio_by_round.back(); }
};

// Cumulative coverage of the grid: fraction of voxels whose best power so far reaches
// floor x optimum. Round 0 is the unperturbed base beam.
ScanResult scanning_ratio(const field::ChannelMatrix& m, const std::vector<double>& base, double sigma_rad,
                          int n_perturbations, double floor, std::uint64_t seed, Exec exec = Exec::Parallel);

// Voxels of the unperturbed beam's half-power region connected to the focus voxel.
std::vector<bool> main_lobe_mask(const field::ChannelMatrix& m, const field::Grid& grid,
                                 const std::vector<double>& base, Position focus);

// Strongest power outside the main-lobe mask for one perturbed pattern, in dB
// relative to the coherent optimum of that voxel (<= 0).
double strongest_sidelobe_db(const field::ChannelMatrix& m, const std::vector<bool>& main_lobe,
                             const std::vector<double>& phases, Exec exec = Exec::Parallel);

struct ColdStartResult {
    bool success = false;
    int rounds_used = 0;           // perturbation rounds; 0 means the base beam sufficed
    std::vector<double> phases;    // phases of the waking round (or the last tried)
};

// probe(phases) -> true when the node woke and the leader heard it.
using Probe = std::function<bool(const std::vector<double>&)>;
ColdStartResult search(const std::vector<double>& base, const ColdStartConfig& cfg, std::mt19937_64& rng,
                       const Probe& probe);

}  // namespace bab::coldstart
