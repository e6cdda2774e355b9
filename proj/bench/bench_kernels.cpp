// Serial reference loops against their OpenMP counterparts, plus one full
// eigen-solve for scale. Run with SPL_THREADS to vary the thread count.
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "spl/eigensolve.hpp"
#include "spl/kernels.hpp"
#include "spl/optimize.hpp"
#include "spl/rng.hpp"

namespace {

using namespace spl;

std::vector<double> random_vector(std::size_t n, std::uint64_t stream) {
    CounterRng rng(7, stream);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform();
    return v;
}

template <bool Parallel>
void BM_weighted_dot(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto w = random_vector(n, 1), a = random_vector(n, 2), b = random_vector(n, 3);
    for (auto _ : state) {
        const double s = Parallel ? kernels::parallel::weighted_dot(w, a, b) : kernels::serial::weighted_dot(w, a, b);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

template <bool Parallel>
void BM_spmv(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const GridPtr grid = make_polar_grid(1.0, side, side);
    const DiscreteOperator op = assemble(*grid, ball_potential(grid, 0.6));
    auto P = op.pencil();
    P.makeCompressed();
    const auto n = static_cast<std::size_t>(P.rows());
    const kernels::CsrView view{{P.outerIndexPtr(), n + 1},
                                {P.innerIndexPtr(), static_cast<std::size_t>(P.nonZeros())},
                                {P.valuePtr(), static_cast<std::size_t>(P.nonZeros())}};
    const auto x = random_vector(n, 4);
    std::vector<double> y(n);
    for (auto _ : state) {
        if (Parallel) kernels::parallel::spmv(view, x, y);
        else kernels::serial::spmv(view, x, y);
        benchmark::DoNotOptimize(y.data());
    }
}

template <bool Parallel>
void BM_graph_disk(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const int sub = 8;
    std::vector<double> rho(static_cast<std::size_t>(side * sub));
    for (std::size_t s = 0; s < rho.size(); ++s) rho[s] = 0.6 + 0.05 * std::cos(3.0 * 6.283185307179586 * double(s) / double(rho.size()));
    const kernels::GraphDiskInput in{side, side, sub, 1.0 / side, rho};
    std::vector<double> out(static_cast<std::size_t>(side * side));
    for (auto _ : state) {
        if (Parallel) kernels::parallel::graph_disk_fractions(in, out);
        else kernels::serial::graph_disk_fractions(in, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_principal_polar(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const GridPtr grid = make_polar_grid(1.0, side, side);
    const PotentialField V = ball_potential(grid, 0.6);
    for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(V).lambda);
}

} // namespace

BENCHMARK(BM_weighted_dot<false>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_weighted_dot<true>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_spmv<false>)->Arg(128)->Arg(256);
BENCHMARK(BM_spmv<true>)->Arg(128)->Arg(256);
BENCHMARK(BM_graph_disk<false>)->Arg(256)->Arg(512);
BENCHMARK(BM_graph_disk<true>)->Arg(256)->Arg(512);
BENCHMARK(BM_principal_polar)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    kernels::apply_thread_limit_from_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
