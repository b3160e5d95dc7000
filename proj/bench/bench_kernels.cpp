// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "qstab/certify.hpp"
#include "qstab/kernels.hpp"
#include "qstab/presets.hpp"
#include "qstab/reference.hpp"

using namespace qstab;

namespace {

SystemModel model_of_dim(int dim) { return presets::two_photon_loss({cplx(1.0, 0.0), dim}); }

void BM_LiouvillianParallel(benchmark::State& state) {
    const SystemModel m = model_of_dim(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::assemble_liouvillian(m, Picture::schrodinger));
}

void BM_LiouvillianReference(benchmark::State& state) {
    const SystemModel m = model_of_dim(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::liouvillian_by_columns(m, Picture::schrodinger));
}

void BM_GeneratorKernel(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const SystemModel m = model_of_dim(d);
    const kernels::GeneratorKernel k(m);
    const Operator rho = random_density(d, d, 1).op();
    Operator out;
    for (auto _ : state) {
        k.apply_schrodinger(rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_GeneratorLoops(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const SystemModel m = model_of_dim(d);
    const Operator rho = random_density(d, d, 1).op();
    for (auto _ : state) benchmark::DoNotOptimize(reference::schrodinger_generator_loops(m, rho));
}

template <bool Parallel>
void BM_Sampler(benchmark::State& state) {
    static const InvariantSet set = invariant_set(presets::two_photon_loss());
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> traces(n);
    auto body = [&](std::size_t i) { traces[i] = sample_state(set, 30, 26, 7, i).trace().real(); };
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::parallel_for(n, body);
        } else {
            reference::serial_for(n, body);
        }
        benchmark::DoNotOptimize(traces.data());
    }
}

}  // namespace

BENCHMARK(BM_LiouvillianParallel)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LiouvillianReference)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GeneratorKernel)->Arg(30)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GeneratorLoops)->Arg(30)->Arg(60)->Arg(120)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sampler<true>)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sampler<false>)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
