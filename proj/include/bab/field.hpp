#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bab/channel.hpp"
#include "bab/parallel.hpp"

namespace bab::field {

// Regular voxel grid; voxel centres at origin + (i, j, k) * step.
struct Grid {
    Position origin;
    double step = 0.05;
    int nx = 1, ny = 1, nz = 1;

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nz; }
    Position at(std::size_t idx) const;
    std::size_t index_of(Position p) const;  // nearest voxel, clamped
};

Grid cube_grid(Position center, double edge_m, double step_m);
// Horizontal slice through center (nz = 1).
Grid plane_grid(Position center, double width_m, double depth_m, double step_m);

// Coefficients h[v * slaves + s] from every slave to every voxel, scaled by the slave
// drive amplitude, plus the coherent optimum (sum |h|)^2 per voxel.
struct ChannelMatrix {
    std::size_t voxels = 0;
    std::size_t slaves = 0;
    std::vector<cplx> h;
    std::vector<double> optimal_power;
};

ChannelMatrix build_channels(const Grid& grid, std::span<const Position> tx, const channel::MediumMap& medium,
                             const channel::ChannelConfig& cfg, double drive_amplitude, Exec exec = Exec::Parallel);

// out[v] = |sum_s h[v, s] * w[s]|^2
void field_power(const ChannelMatrix& m, std::span<const cplx> weights, std::span<double> out,
                 Exec exec = Exec::Parallel);

// cummax[v] = max(cummax[v], field power at v)
void accumulate_max(const ChannelMatrix& m, std::span<const cplx> weights, std::span<double> cummax,
                    Exec exec = Exec::Parallel);

std::vector<cplx> phase_weights(std::span<const double> phases);

}  // namespace bab::field
