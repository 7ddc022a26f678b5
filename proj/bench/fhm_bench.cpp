// Parallel kernels against the serial reference versions.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

#include "fhm/dirichlet_solver.hpp"
#include "fhm/factorization.hpp"
#include "fhm/linear_elliptic.hpp"
#include "fhm/reference.hpp"
#include "fhm/verification.hpp"

using namespace fhm;

namespace {

Mat a_true()
{
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 0.25;
    m(1, 1) = -0.1;
    return m;
}

const SyntheticFlat& background(int n_rad)
{
    static std::map<int, SyntheticFlat> cache;
    auto it = cache.find(n_rad);
    if (it == cache.end())
        it = cache.emplace(n_rad, synthetic_flat({2, 1, 0.15, a_true(), 7},
                                                 Grid(DomainSpec::annulus(0.5, 1.0), n_rad, 2 * n_rad)))
                 .first;
    return it->second;
}

/// Range arguments of the parallel runs: n_rad, thread count.
void set_threads(benchmark::State& state)
{
    omp_set_num_threads(static_cast<int>(state.range(1)));
    state.counters["threads"] = static_cast<double>(state.range(1));
}

void BM_curvature_parallel(benchmark::State& state)
{
    set_threads(state);
    const MetricField& p = background(static_cast<int>(state.range(0))).metric;
    for (auto _ : state)
        benchmark::DoNotOptimize(curvature_residual(p));
}

void BM_curvature_reference(benchmark::State& state)
{
    const MetricField& p = background(static_cast<int>(state.range(0))).metric;
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::curvature_residual(p));
}

void BM_apply_L_parallel(benchmark::State& state)
{
    set_threads(state);
    const MetricField& p = background(static_cast<int>(state.range(0))).metric;
    const LinearizedContext ctx(p);
    const HermitianField h = random_psd_field(p.grid(), 2, 3, false);
    for (auto _ : state)
        benchmark::DoNotOptimize(apply_L(ctx, h));
}

void BM_apply_L_reference(benchmark::State& state)
{
    const MetricField& p = background(static_cast<int>(state.range(0))).metric;
    const HermitianField h = random_psd_field(p.grid(), 2, 3, false);
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::apply_L(p, h));
}

void BM_d_mixed_parallel(benchmark::State& state)
{
    set_threads(state);
    const MetricField& p = background(static_cast<int>(state.range(0))).metric;
    for (auto _ : state)
        benchmark::DoNotOptimize(d_mixed(p));
}

void BM_d_mixed_reference(benchmark::State& state)
{
    const MetricField& p = background(static_cast<int>(state.range(0))).metric;
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::d_mixed(p));
}

void BM_solve(benchmark::State& state)
{
    set_threads(state);
    const SyntheticFlat& syn = background(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(solve(syn.boundary, syn.metric.grid()));
}

void BM_factorize(benchmark::State& state)
{
    set_threads(state);
    const MetricField& p = background(static_cast<int>(state.range(0))).metric;
    FactorOptions opts;
    opts.tol_unitary = 1e-3;
    for (auto _ : state)
        benchmark::DoNotOptimize(factorize_annulus(p, opts));
}

void kernel_sizes(benchmark::internal::Benchmark* b)
{
    const int max_threads = omp_get_max_threads();
    for (int n : {64, 128})
        for (int t = 1; t <= max_threads; t *= 2)
            b->Args({n, t});
}

void reference_sizes(benchmark::internal::Benchmark* b)
{
    for (int n : {64, 128})
        b->Arg(n);
}

}  // namespace

BENCHMARK(BM_curvature_parallel)->Apply(kernel_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_curvature_reference)->Apply(reference_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_L_parallel)->Apply(kernel_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_L_reference)->Apply(reference_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_d_mixed_parallel)->Apply(kernel_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_d_mixed_reference)->Apply(reference_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve)->Args({32, 1})->Args({64, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_factorize)->Args({64, 1})->Args({128, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
