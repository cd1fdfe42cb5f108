#include <benchmark/benchmark.h>

#include <vector>

#include "bab/beamform.hpp"
#include "bab/coldstart.hpp"
#include "bab/field.hpp"
#include "bab/parallel.hpp"
#include "bab/scenario.hpp"

using namespace bab;

namespace {

// 24 ceiling slaves and a 2 m cube of 5 cm voxels around the leader.
struct Fixture {
    Scenario s = presets::testbed(24);
    field::Grid grid = field::cube_grid(s.leader, 2.0, 0.05);
    field::ChannelMatrix m = field::build_channels(grid, s.slaves, s.medium, channel::ChannelConfig{}, 1.0);
    std::vector<cplx> w = field::phase_weights(std::vector<double>(s.slaves.size(), 0.7));
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_build_channels(benchmark::State& st) {
    auto& f = fixture();
    const auto small = field::cube_grid(f.s.leader, 1.0, 0.05);
    for (auto _ : st)
        benchmark::DoNotOptimize(field::build_channels(small, f.s.slaves, f.s.medium, channel::ChannelConfig{}, 1.0,
                                                       exec_of(st)));
    st.SetItemsProcessed(st.iterations() * small.size() * f.s.slaves.size());
}

void BM_field_power(benchmark::State& st) {
    auto& f = fixture();
    std::vector<double> out(f.m.voxels);
    for (auto _ : st) {
        field::field_power(f.m, f.w, out, exec_of(st));
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * f.m.voxels * f.m.slaves);
}

void BM_accumulate_max(benchmark::State& st) {
    auto& f = fixture();
    std::vector<double> cm(f.m.voxels, 0.0);
    for (auto _ : st) {
        field::accumulate_max(f.m, f.w, cm, exec_of(st));
        benchmark::DoNotOptimize(cm.data());
    }
    st.SetItemsProcessed(st.iterations() * f.m.voxels * f.m.slaves);
}

void BM_replicate_unit_loop(benchmark::State& st) {
    beamform::AlignmentConfig cfg;
    cfg.mode = beamform::BoundMode::Fixed;
    for (auto _ : st) {
        auto r = replicate(64, [&](std::size_t i) { return beamform::simulate_unit_loop(24, 200, cfg, {}, i).back(); },
                           exec_of(st));
        benchmark::DoNotOptimize(r.data());
    }
    st.SetItemsProcessed(st.iterations() * 64);
}

}  // namespace

// Argument 0 is the serial reference, 1 the OpenMP path.
BENCHMARK(BM_build_channels)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_field_power)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_accumulate_max)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_replicate_unit_loop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
