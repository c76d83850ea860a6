#include <benchmark/benchmark.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "cmt/deform.hpp"

namespace {

using namespace cmt;

void BM_HodgeStar(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    SeededRng rng(21);
    const Eigen::MatrixXd g = Eigen::MatrixXd((0.4 * rng.sym_real(m, 1.0)).exp());
    const WedgeModel w(m, g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(w.star());
    }
}
BENCHMARK(BM_HodgeStar)->Arg(3)->Arg(5)->Arg(6);

void BM_TorusModel(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const CVector flux = make_form(m, {{0b111u, Complex(2, 0)}});
    for (auto _ : state) {
        benchmark::DoNotOptimize(torus_model(m, Eigen::MatrixXd::Identity(m, m), flux));
    }
}
BENCHMARK(BM_TorusModel)->Arg(3)->Arg(5);

void BM_TorusSweepPoint(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const CVector flux = make_form(m, {{0b111u, Complex(2, 0)}});
    SeededRng rng(31);
    const Eigen::MatrixXd sym = rng.sym_real(m, 1.0);
    const DeformFamily fam =
        torus_metric_family(m, flux, [sym](double u) { return Eigen::MatrixXd((u * sym).exp()); });
    auto [de, dod] = laplacian(fam.base);
    const double lambda = 0.77 * std::max(scale_of(de), scale_of(dod));
    const CohBases bases = default_bases(make_split(fam.base));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            fd_rate(fam, 0.2, 1e-3, lambda, RatePath::full_assembly, bases));
    }
}
BENCHMARK(BM_TorusSweepPoint)->Arg(3)->Arg(5);

void BM_RandomBicomplex(benchmark::State& state) {
    const Index n = state.range(0);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(random_bicomplex(n, n, 1, 1, SpectralProfile::unit, ++seed));
    }
}
BENCHMARK(BM_RandomBicomplex)->Arg(8)->Arg(16);

}  // namespace
