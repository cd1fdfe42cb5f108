#include "bab/field.hpp"

#include <algorithm>
#include <stdexcept>

namespace bab::field {

Position Grid::at(std::size_t idx) const {
    const std::size_t i = idx % nx;
    const std::size_t j = (idx / nx) % ny;
    const std::size_t k = idx / (static_cast<std::size_t>(nx) * ny);
    return {origin.x + step * i, origin.y + step * j, origin.z + step * k};
}

std::size_t Grid::index_of(Position p) const {
    auto idx = [this](double v, double o, int n) {
        const long r = std::lround((v - o) / step);
        return static_cast<std::size_t>(std::clamp<long>(r, 0, n - 1));
    };
    return idx(p.x, origin.x, nx) + nx * (idx(p.y, origin.y, ny) + static_cast<std::size_t>(ny) * idx(p.z, origin.z, nz));
}

Grid cube_grid(Position center, double edge_m, double step_m) {
    if (!(edge_m > 0.0) || !(step_m > 0.0)) throw std::domain_error("grid: edge and step must be positive");
    Grid g;
    g.step = step_m;
    g.nx = g.ny = g.nz = std::max(1, static_cast<int>(std::lround(edge_m / step_m)) + 1);
    const double half = 0.5 * step_m * (g.nx - 1);
    g.origin = {center.x - half, center.y - half, center.z - half};
    return g;
}

Grid plane_grid(Position center, double width_m, double depth_m, double step_m) {
    if (!(width_m > 0.0) || !(depth_m > 0.0) || !(step_m > 0.0))
        throw std::domain_error("grid: extents and step must be positive");
    Grid g;
    g.step = step_m;
    g.nx = std::max(1, static_cast<int>(std::lround(width_m / step_m)) + 1);
    g.ny = std::max(1, static_cast<int>(std::lround(depth_m / step_m)) + 1);
    g.nz = 1;
    g.origin = {center.x - 0.5 * step_m * (g.nx - 1), center.y - 0.5 * step_m * (g.ny - 1), center.z};
    return g;
}

ChannelMatrix build_channels(const Grid& grid, std::span<const Position> tx, const channel::MediumMap& medium,
                             const channel::ChannelConfig& cfg, double drive_amplitude, Exec exec) {
    ChannelMatrix m;
    m.voxels = grid.size();
    m.slaves = tx.size();
    m.h.assign(m.voxels * m.slaves, cplx{});
    m.optimal_power.assign(m.voxels, 0.0);
    const long nv = static_cast<long>(m.voxels);
    auto one = [&](long v) {
        const Position p = grid.at(static_cast<std::size_t>(v));
        double amp = 0.0;
        for (std::size_t s = 0; s < m.slaves; ++s) {
            const cplx c = drive_amplitude * channel::channel(tx[s], p, medium, cfg, s).value();
            m.h[static_cast<std::size_t>(v) * m.slaves + s] = c;
            amp += std::abs(c);
        }
        m.optimal_power[static_cast<std::size_t>(v)] = amp * amp;
    };
    if (exec == Exec::Serial) {
        for (long v = 0; v < nv; ++v) one(v);
    } else {
#pragma omp parallel for schedule(static)
        for (long v = 0; v < nv; ++v) one(v);
    }
    return m;
}

namespace {

inline double voxel_power(const ChannelMatrix& m, const cplx* w, std::size_t v) {
    const cplx* row = m.h.data() + v * m.slaves;
    double re = 0.0, im = 0.0;
    for (std::size_t s = 0; s < m.slaves; ++s) {
        const cplx z = row[s] * w[s];
        re += z.real();
        im += z.imag();
    }
    return re * re + im * im;
}

void check(const ChannelMatrix& m, std::span<const cplx> w, std::span<double> out) {
    if (w.size() != m.slaves) throw std::invalid_argument("field: weight count differs from slave count");
    if (out.size() != m.voxels) throw std::invalid_argument("field: output size differs from voxel count");
}

}  // namespace

void field_power(const ChannelMatrix& m, std::span<const cplx> weights, std::span<double> out, Exec exec) {
    check(m, weights, out);
    const long nv = static_cast<long>(m.voxels);
    const cplx* w = weights.data();
    if (exec == Exec::Serial) {
        for (long v = 0; v < nv; ++v) out[v] = voxel_power(m, w, v);
        return;
    }
#pragma omp parallel for schedule(static)
    for (long v = 0; v < nv; ++v) out[v] = voxel_power(m, w, v);
}

void accumulate_max(const ChannelMatrix& m, std::span<const cplx> weights, std::span<double> cummax, Exec exec) {
    check(m, weights, cummax);
    const long nv = static_cast<long>(m.voxels);
    const cplx* w = weights.data();
    if (exec == Exec::Serial) {
        for (long v = 0; v < nv; ++v) cummax[v] = std::max(cummax[v], voxel_power(m, w, v));
        return;
    }
#pragma omp parallel for schedule(static)
    for (long v = 0; v < nv; ++v) cummax[v] = std::max(cummax[v], voxel_power(m, w, v));
}

std::vector<cplx> phase_weights(std::span<const double> phases) {
    std::vector<cplx> w(phases.size());
    for (std::size_t i = 0; i < phases.size(); ++i) w[i] = std::polar(1.0, phases[i]);
    return w;
}

}  // namespace bab::field
