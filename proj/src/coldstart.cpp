#include "bab/coldstart.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace bab::coldstart {

void ColdStartConfig::validate() const {
    if (!(sigma_deg >= 0.0) || !(sigma_deg < 180.0)) throw std::domain_error("cold start: sigma must be in [0, 180)");
    if (!(cube_edge_m > 0.0) || !(voxel_m > 0.0)) throw std::domain_error("cold start: cube edge and voxel must be positive");
    if (max_perturbations < 0) throw std::domain_error("cold start: negative perturbation budget");
    if (!(wake_power_floor > 0.0) || wake_power_floor > 1.0)
        throw std::domain_error("cold start: wake power floor must be in (0, 1]");
}

std::vector<double> focus_phases(const std::vector<cplx>& h) {
    std::vector<double> p(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) p[i] = wrap_phase(-std::arg(h[i]));
    return p;
}

std::vector<double> perturbation_round(const std::vector<double>& base, double sigma_rad, std::mt19937_64& rng) {
    std::vector<double> out(base.size());
    if (sigma_rad <= 0.0) return base;
    std::uniform_real_distribution<double> d(-sigma_rad, sigma_rad);
    for (std::size_t i = 0; i < base.size(); ++i) out[i] = wrap_phase(base[i] + d(rng));
    return out;
}

ScanResult scanning_ratio(const field::ChannelMatrix& m, const std::vector<double>& base, double sigma_rad,
                          int n_perturbations, double floor, std::uint64_t seed, Exec exec) {
    if (m.voxels == 0) throw std::domain_error("scanning_ratio: empty grid");
    ScanResult res;
    res.cumulative_max.assign(m.voxels, 0.0);
    std::mt19937_64 rng(mix_seed(seed, 0xc01d));
    auto coverage = [&] {
        std::size_t hit = 0;
        for (std::size_t v = 0; v < m.voxels; ++v)
            if (res.cumulative_max[v] >= floor * m.optimal_power[v]) ++hit;
        return static_cast<double>(hit) / static_cast<double>(m.voxels);
    };
    field::accumulate_max(m, field::phase_weights(base), res.cumulative_max, exec);
    res.ratio_by_round.push_back(coverage());
    for (int r = 0; r < n_perturbations; ++r) {
        const auto ph = perturbation_round(base, sigma_rad, rng);
        field::accumulate_max(m, field::phase_weights(ph), res.cumulative_max, exec);
        res.ratio_by_round.push_back(coverage());
    }
    return res;
}

std::vector<bool> main_lobe_mask(const field::ChannelMatrix& m, const field::Grid& grid,
                                 const std::vector<double>& base, Position focus) {
    std::vector<double> power(m.voxels);
    field::field_power(m, field::phase_weights(base), power, Exec::Serial);
    std::vector<bool> mask(m.voxels, false);
    const std::size_t start = grid.index_of(focus);
    const double level = 0.5 * power[start];
    std::queue<std::size_t> q;
    q.push(start);
    mask[start] = true;
    const long nx = grid.nx, ny = grid.ny, nz = grid.nz;
    while (!q.empty()) {
        const std::size_t v = q.front();
        q.pop();
        const long i = static_cast<long>(v % nx), j = static_cast<long>((v / nx) % ny),
                   k = static_cast<long>(v / (nx * ny));
        const long nb[6][3] = {{i - 1, j, k}, {i + 1, j, k}, {i, j - 1, k}, {i, j + 1, k}, {i, j, k - 1}, {i, j, k + 1}};
        for (const auto& n : nb) {
            if (n[0] < 0 || n[0] >= nx || n[1] < 0 || n[1] >= ny || n[2] < 0 || n[2] >= nz) continue;
            const std::size_t u = static_cast<std::size_t>(n[0] + nx * (n[1] + ny * n[2]));
            if (!mask[u] && power[u] >= level) {
                mask[u] = true;
                q.push(u);
            }
        }
    }
    return mask;
}

double strongest_sidelobe_db(const field::ChannelMatrix& m, const std::vector<bool>& main_lobe,
                             const std::vector<double>& phases, Exec exec) {
    std::vector<double> power(m.voxels);
    field::field_power(m, field::phase_weights(phases), power, exec);
    double best = 0.0;
    for (std::size_t v = 0; v < m.voxels; ++v)
        if (!main_lobe[v] && m.optimal_power[v] > 0.0) best = std::max(best, power[v] / m.optimal_power[v]);
    return best > 0.0 ? 10.0 * std::log10(best) : -300.0;
}

ColdStartResult search(const std::vector<double>& base, const ColdStartConfig& cfg, std::mt19937_64& rng,
                       const Probe& probe) {
    cfg.validate();
    ColdStartResult res;
    res.phases = base;
    if (probe(base)) {
        res.success = true;
        return res;
    }
    const double sigma = deg_to_rad(cfg.sigma_deg);
    for (int r = 1; r <= cfg.max_perturbations; ++r) {
        res.phases = perturbation_round(base, sigma, rng);
        res.rounds_used = r;
        if (probe(res.phases)) {
            res.success = true;
            return res;
        }
    }
    return res;
}

}  // namespace bab::coldstart
