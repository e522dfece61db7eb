#include <benchmark/benchmark.h>

#include "marchenko/companion.hpp"
#include "marchenko/dispersion.hpp"
#include "marchenko/fredholm.hpp"

using namespace marchenko;

namespace {

MatrixProfile gaussian(int nodes, int n) {
    const auto g = make_uniform_grid(32.0, nodes);
    InitialDataSpec spec;
    spec.terms.push_back(GaussianTerm{CMatrix::Identity(n, n) * 0.3, 1.0, -2.0});
    return sample_profile(spec, g, n, n);
}

void BM_Evolve(benchmark::State& state) {
    const auto p = gaussian(static_cast<int>(state.range(0)), 2);
    const DispersionParams prm{cplx{0.0, -1.0}, cplx{-0.5}};
    for (auto _ : state) benchmark::DoNotOptimize(evolve(p, prm, 0.5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Evolve)->RangeMultiplier(2)->Range(512, 8192)->Complexity();

void BM_AssembleQ(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = gaussian(4096, 1);
    const auto pt = companion_profile(p, CompanionKind::adjoint);
    const auto quad = make_quadrature(15.0, n, p.grid.spacing());
    for (auto _ : state) benchmark::DoNotOptimize(assemble_Q(p, pt, 0.0, quad));
    state.SetComplexityN(n);
}
BENCHMARK(BM_AssembleQ)->Arg(120)->Arg(240)->Arg(480)->Arg(960)->Complexity();

void BM_FredholmSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = gaussian(4096, 1);
    const auto pt = companion_profile(p, CompanionKind::adjoint);
    const auto quad = make_quadrature(15.0, n, p.grid.spacing());
    const auto q = assemble_Q(p, pt, 0.0, quad);
    const auto rhs = hankel_kernel(p, 0.0, quad);
    for (auto _ : state) {
        const FredholmSystem sys(q);
        benchmark::DoNotOptimize(sys.solve_row(rhs, quad.origin()));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_FredholmSolve)->Arg(120)->Arg(240)->Arg(480)->Arg(960)->Complexity(benchmark::oNCubed);

} // namespace

BENCHMARK_MAIN();
