#include <benchmark/benchmark.h>

#include "cmt/models.hpp"
#include "cmt/torsion.hpp"

namespace {

using namespace cmt;

void BM_TorsionDefinition(benchmark::State& state) {
    const Index n = state.range(0);
    const BiComplex c = random_acyclic_bicomplex(n, SpectralProfile::unit, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(torsion_definition(c));
    }
}
BENCHMARK(BM_TorsionDefinition)->Arg(4)->Arg(8)->Arg(16);

void BM_TorsionAcyclic(benchmark::State& state) {
    const Index n = state.range(0);
    const BiComplex c = random_acyclic_bicomplex(n, SpectralProfile::unit, 12);
    for (auto _ : state) {
        benchmark::DoNotOptimize(torsion_acyclic(c));
    }
}
BENCHMARK(BM_TorsionAcyclic)->Arg(4)->Arg(8)->Arg(16);

void BM_TorsionTruncated(benchmark::State& state) {
    const Index n = state.range(0);
    const BiComplex c = random_bicomplex(n, n, 1, 1, SpectralProfile::unit, 13);
    auto [de, dod] = laplacian(c);
    const double lambda = 0.5 * std::max(scale_of(de), scale_of(dod));
    for (auto _ : state) {
        benchmark::DoNotOptimize(torsion_truncated(c, lambda));
    }
}
BENCHMARK(BM_TorsionTruncated)->Arg(4)->Arg(8)->Arg(16);

void BM_SpectralTruncate(benchmark::State& state) {
    const Index n = state.range(0);
    const BiComplex c = random_bicomplex(n, n, 1, 1, SpectralProfile::unit, 14);
    auto [de, dod] = laplacian(c);
    const double lambda = 0.5 * std::max(scale_of(de), scale_of(dod));
    for (auto _ : state) {
        benchmark::DoNotOptimize(spectral_truncate(c, lambda));
    }
}
BENCHMARK(BM_SpectralTruncate)->Arg(8)->Arg(16)->Arg(32);

}  // namespace
