#include <benchmark/benchmark.h>

#include "cmt/models.hpp"
#include "cmt/numkit.hpp"

namespace {

using namespace cmt;

void BM_Schur(benchmark::State& state) {
    SeededRng rng(1);
    const Index n = state.range(0);
    const CMatrix a = rng.matrix(n, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(schur(a));
    }
}
BENCHMARK(BM_Schur)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_EigClusters(benchmark::State& state) {
    SeededRng rng(2);
    const Index n = state.range(0);
    const CMatrix a = rng.matrix(n, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eig_clusters(a, 1e-7));
    }
}
BENCHMARK(BM_EigClusters)->Arg(8)->Arg(16)->Arg(32);

void BM_RankBasis(benchmark::State& state) {
    SeededRng rng(3);
    const Index n = state.range(0);
    const CMatrix a = rng.matrix(n, n / 2 + 1) * rng.matrix(n / 2 + 1, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rank_basis(a, 1e-9));
    }
}
BENCHMARK(BM_RankBasis)->Arg(16)->Arg(64);

void BM_Sylvester(benchmark::State& state) {
    SeededRng rng(4);
    const Index n = state.range(0);
    const CMatrix a = rng.matrix(n, n) + 4.0 * CMatrix::Identity(n, n);
    const CMatrix b = rng.matrix(n, n) - 4.0 * CMatrix::Identity(n, n);
    const CMatrix c = rng.matrix(n, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sylvester(a, b, c));
    }
}
BENCHMARK(BM_Sylvester)->Arg(8)->Arg(24);

}  // namespace

BENCHMARK_MAIN();
