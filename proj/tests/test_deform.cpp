#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "cmt/deform.hpp"

using namespace cmt;

namespace {

DeformFamily torus3_family(std::uint64_t path_seed, Complex t = Complex(2, 0)) {
    const CVector flux = make_form(3, {{0b111u, t}});
    SeededRng rng(path_seed);
    const Eigen::MatrixXd sym = rng.sym_real(3, 1.0);
    return torus_metric_family(3, flux,
                               [sym](double u) { return Eigen::MatrixXd((u * sym).exp()); });
}

double spectral_top(const BiComplex& c) {
    auto [de, dod] = laplacian(c);
    return std::max(scale_of(de), scale_of(dod));
}

}  // namespace

TEST_CASE("supertrace: graded dimension and block values") {
    const CMatrix i0 = CMatrix::Identity(3, 3);
    const CMatrix i1 = CMatrix::Identity(2, 2);
    CHECK(std::abs(supertrace(i0, i1) - Complex(1, 0)) == 0.0);  // 3 - 2

    CMatrix a(1, 1), b(1, 1);
    a << Complex(2.5, 1);
    b << Complex(1, -1);
    CHECK(std::abs(supertrace(a, b) - Complex(1.5, 2)) <= 1e-15);
}

TEST_CASE("supertrace with projectors: compression onto a coordinate line") {
    SeededRng rng(5);
    const CMatrix alpha = rng.matrix(3, 3);
    CMatrix p = CMatrix::Zero(3, 3);
    p(0, 0) = 1;
    const Complex st = supertrace(alpha, CMatrix::Zero(0, 0), p, CMatrix::Zero(0, 0));
    CHECK(std::abs(st - alpha(0, 0)) <= 1e-15);
}

TEST_CASE("supertrace: non-commuting projector rejected when checked") {
    SeededRng rng(6);
    const CMatrix alpha = rng.matrix(3, 3);
    CMatrix p = CMatrix::Zero(3, 3);
    p(0, 0) = 1;
    CHECK_THROWS_AS(supertrace(alpha, alpha, p, p, 1e-10), RestrictionError);
    const CMatrix id = CMatrix::Identity(3, 3);
    CHECK_NOTHROW(supertrace(alpha, alpha, id, id, 1e-10));
}

TEST_CASE("predicted_rate: zero generator and balanced scalar generator") {
    const BiComplex base = random_acyclic_bicomplex(3, SpectralProfile::unit, 321);
    const double lambda = 3.0 * spectral_top(base);
    const DeformFamily zero = flux_family(base, CMatrix::Zero(3, 3), CMatrix::Zero(3, 3));
    CHECK(std::abs(predicted_rate(zero, 0.0, lambda)) <= 1e-12);

    // alpha = c I on balanced dims: the supertrace vanishes
    const Complex c(0.3, 0.1);
    const DeformFamily bal =
        metric_family(base, c * CMatrix::Identity(3, 3), c * CMatrix::Identity(3, 3));
    CHECK(std::abs(predicted_rate(bal, 0.0, lambda)) <= 1e-12);
}

TEST_CASE("predicted_rate above the spectrum is minus the full supertrace") {
    SeededRng rng(9);
    const BiComplex base = random_acyclic_bicomplex(3, SpectralProfile::unit, 55);
    const CMatrix b0 = 0.2 * rng.matrix(3, 3);
    const CMatrix b1 = 0.2 * rng.matrix(3, 3);
    // metric law: one moving differential, one supertrace
    const DeformFamily famm = metric_family(base, b0, b1);
    const double lambda = 3.0 * spectral_top(base);
    CHECK(std::abs(predicted_rate(famm, 0.0, lambda) + supertrace(b0, b1)) <= 1e-9);
    // flux law: both differentials move, twice the supertrace
    const DeformFamily famf = flux_family(base, b0, b1);
    CHECK(std::abs(predicted_rate(famf, 0.0, lambda) + 2.0 * supertrace(b0, b1)) <= 1e-9);
}

TEST_CASE("fd_rate: constant family differentiates to zero") {
    const BiComplex base = random_acyclic_bicomplex(2, SpectralProfile::unit, 77);
    const DeformFamily zero = metric_family(base, CMatrix::Zero(2, 2), CMatrix::Zero(2, 2));
    const double lambda = 3.0 * spectral_top(base);
    const CohBases bases = default_bases(make_split(base));
    const Complex fd = fd_rate(zero, 0.2, 1e-3, lambda, RatePath::truncated_part, bases);
    CHECK(std::abs(fd) <= 1e-8);
}

TEST_CASE("fd_rate matches predicted_rate: flux family, Richardson epsilons") {
    const BiComplex base = random_acyclic_bicomplex(2, SpectralProfile::unit, 3);
    SeededRng rng(4);
    const CMatrix b0 = 0.4 * rng.matrix(2, 2);
    const CMatrix b1 = 0.4 * rng.matrix(2, 2);
    const DeformFamily fam = flux_family(base, b0, b1);
    const double lambda = 4.0 * spectral_top(base);
    const CohBases bases = default_bases(make_split(base));
    const Complex pred = predicted_rate(fam, 0.1, lambda);
    for (double eps : {1e-2, 5e-3}) {
        const Complex fd = fd_rate(fam, 0.1, eps, lambda, RatePath::truncated_part, bases);
        CHECK(std::abs(fd - pred) <= 10.0 * eps * eps * std::max(1.0, std::abs(pred)));
    }
}

TEST_CASE("fd_rate matches predicted_rate with an interior spectral cut") {
    // Cut inside the spectrum: the [0,lambda] subspace genuinely moves with u.
    const BiComplex base = random_acyclic_bicomplex(4, SpectralProfile::spread, 12);
    SeededRng rng(13);
    const CMatrix a0 = 0.3 * rng.matrix(4, 4);
    const CMatrix a1 = 0.3 * rng.matrix(4, 4);
    const DeformFamily fam = metric_family(base, a0, a1);
    auto [de, dod] = laplacian(base);
    std::vector<double> mags;
    for (const Complex& ev : eigenvalues(de)) mags.push_back(std::abs(ev));
    std::sort(mags.begin(), mags.end());
    REQUIRE(mags.size() >= 2);
    double lambda = 0;
    for (size_t i = 0; i + 1 < mags.size(); ++i) {
        if (mags[i + 1] / std::max(mags[i], 1e-300) > 10.0) {
            lambda = std::sqrt(mags[i] * mags[i + 1]);
            break;
        }
    }
    if (lambda == 0) lambda = std::sqrt(mags[0] * mags[mags.size() - 1]);
    const CohBases bases = default_bases(make_split(base));
    const double eps = 1e-3;
    const Complex pred = predicted_rate(fam, 0.05, lambda);
    const Complex fd = fd_rate(fam, 0.05, eps, lambda, RatePath::truncated_part, bases);
    CHECK(std::abs(fd - pred) <= 10.0 * eps * eps * std::max(1.0, std::abs(pred)));
}

TEST_CASE("fd_rate with transport on a non-acyclic base (lemma with cohomology)") {
    const BiComplex base = random_bicomplex(4, 4, 1, 1, SpectralProfile::unit, 31);
    SeededRng rng(32);
    const CMatrix b0 = 0.3 * rng.matrix(4, 4);
    const CMatrix b1 = 0.3 * rng.matrix(4, 4);
    const DeformFamily fam = flux_family(base, b0, b1);
    const double lambda = 3.0 * spectral_top(base);
    const CohBases bases = default_bases(make_split(base));
    const double eps = 1e-3;
    const Complex pred = predicted_rate(fam, 0.0, lambda);
    const Complex fd = fd_rate(fam, 0.0, eps, lambda, RatePath::truncated_part, bases);
    CHECK(std::abs(fd - pred) <= 10.0 * eps * eps * std::max(1.0, std::abs(pred)));

    // Same with the metric law.
    const DeformFamily famm = metric_family(base, b1, b0);
    const Complex predm = predicted_rate(famm, 0.0, lambda);
    const Complex fdm = fd_rate(famm, 0.0, eps, lambda, RatePath::truncated_part, bases);
    CHECK(std::abs(fdm - predm) <= 10.0 * eps * eps * std::max(1.0, std::abs(predm)));
}

TEST_CASE("torus metric family: alpha agrees with the star-based derivative") {
    const DeformFamily fam = torus3_family(101);
    auto [a0, a1] = fam.generator_at(0.2);
    // Independent route: alpha = star^{-1} dstar/du by central differences.
    const double h = 1e-6;
    const WedgeModel w_mid(3, fam.metric_path(0.2));
    const WedgeModel w_plus(3, fam.metric_path(0.2 + h));
    const WedgeModel w_minus(3, fam.metric_path(0.2 - h));
    const CMatrix dstar = (w_plus.star() - w_minus.star()) / (2 * h);
    const CMatrix alpha_full = solve(w_mid.star(), dstar);
    const std::vector<Index> even = w_mid.parity_indices(0);
    CMatrix a0_star(static_cast<Index>(even.size()), static_cast<Index>(even.size()));
    for (size_t i = 0; i < even.size(); ++i) {
        for (size_t j = 0; j < even.size(); ++j) {
            a0_star(static_cast<Index>(i), static_cast<Index>(j)) = alpha_full(even[i], even[j]);
        }
    }
    CHECK((a0 - a0_star).norm() <= 1e-6 * std::max(1.0, a0.norm()));
    (void)a1;
}

TEST_CASE("odd-dimension independence: torus metric paths keep the full torsion constant") {
    for (std::uint64_t seed : {201ull, 202ull}) {
        const DeformFamily fam = torus3_family(seed, Complex(1.4, 0.3));
        const double lambda = 0.77 * spectral_top(fam.base);
        const CohBases bases = default_bases(make_split(fam.base));
        TorsionOptions o0;
        o0.bases = bases;
        const Complex tau0 = torsion_truncated(fam.base, lambda, o0).value.coord;
        for (double u : {0.15, 0.4}) {
            TorsionOptions ou;
            ou.bases = fam.bases_at(u, bases);
            const Complex tau = torsion_truncated(fam.complex_at(u), lambda, ou).value.coord;
            CHECK(std::abs(tau / tau0 - 1.0) <= 1e-6);
        }
        const Complex fd = fd_rate(fam, 0.2, 1e-3, lambda, RatePath::full_assembly, bases);
        CHECK(std::abs(fd) <= 1e-6);
    }
}

TEST_CASE("variation_report: torus metric sweep passes the constancy policy") {
    const DeformFamily fam = torus3_family(300);
    const double lambda = 0.77 * spectral_top(fam.base);
    const CohBases bases = default_bases(make_split(fam.base));
    VariationPolicy policy;
    policy.full_rate_bound = 1e-6;
    const VariationReport report =
        variation_report(fam, {0.0, 0.25, 0.5}, lambda, 1e-3, bases, policy, {}, 2);
    CHECK(report.all_ok);
    for (const VariationRow& row : report.rows) {
        CHECK(row.error.empty());
        CHECK(std::abs(row.fd_full) <= 1e-6);
        CHECK(row.abs_mismatch <= 10.0 * 1e-6 * std::max(1.0, std::abs(row.predicted)));
    }
    CHECK(report.to_table().find("POLICY-FAIL") == std::string::npos);
}

TEST_CASE("variation_report: empty grid gives an empty table") {
    const DeformFamily fam = torus3_family(301);
    const VariationReport report =
        variation_report(fam, {}, 1.0, 1e-3, default_bases(make_split(fam.base)));
    CHECK(report.rows.empty());
    CHECK(report.all_ok);
}

TEST_CASE("variation_report: flux family rows match within the eps^2 policy") {
    const BiComplex base = random_acyclic_bicomplex(3, SpectralProfile::unit, 441);
    // nilpotent even generator
    CMatrix b0 = CMatrix::Zero(3, 3);
    b0(0, 1) = Complex(0.4, 0.1);
    b0(1, 2) = Complex(-0.2, 0.3);
    CMatrix b1 = CMatrix::Zero(3, 3);
    b1(0, 2) = Complex(0.5, -0.1);
    const DeformFamily fam = flux_family(base, b0, b1);
    const double lambda = 3.0 * spectral_top(base);
    const VariationReport report = variation_report(fam, {0.0, 0.1, 0.2}, lambda, 1e-3,
                                                    default_bases(make_split(base)));
    CHECK(report.all_ok);
}

TEST_CASE("exact intertwining: conjugated families keep square-zero to 1e-11 scale") {
    const BiComplex base = random_bicomplex(4, 4, 1, 1, SpectralProfile::unit, 515);
    SeededRng rng(516);
    const DeformFamily fam = flux_family(base, 0.5 * rng.matrix(4, 4), 0.5 * rng.matrix(4, 4));
    for (double v : {0.3, 0.9}) {
        const BiComplex moved = fam.complex_at(v);
        const double scale = std::max(1.0, moved.d_eo.norm() * moved.d_oe.norm());
        CHECK((moved.d_oe * moved.d_eo).norm() <= 1e-11 * scale);
        CHECK((moved.d_eo * moved.d_oe).norm() <= 1e-11 * scale);
    }
}

TEST_CASE("flux family first-order law: d'(0) = [beta, d] and d*'(0) = -[beta, d*]") {
    const BiComplex base = random_bicomplex(3, 3, 1, 1, SpectralProfile::unit, 717);
    SeededRng rng(718);
    const CMatrix b0 = 0.4 * rng.matrix(3, 3);
    const CMatrix b1 = 0.4 * rng.matrix(3, 3);
    const DeformFamily fam = flux_family(base, b0, b1);
    const double h = 1e-5;
    const BiComplex plus = fam.complex_at(h);
    const BiComplex minus = fam.complex_at(-h);
    const CMatrix fd_deo = (plus.d_eo - minus.d_eo) / (2 * h);
    const CMatrix comm_deo = b1 * base.d_eo - base.d_eo * b0;  // [beta, d] on the eo block
    CHECK((fd_deo - comm_deo).norm() <= 1e-7 * std::max(1.0, comm_deo.norm()));
    const CMatrix fd_dseo = (plus.ds_eo - minus.ds_eo) / (2 * h);
    const CMatrix comm_dseo = b1 * base.ds_eo - base.ds_eo * b0;
    CHECK((fd_dseo + comm_dseo).norm() <= 1e-7 * std::max(1.0, comm_dseo.norm()));
}

TEST_CASE("variation_report: per-point failures are reported inline, not fatal") {
    const BiComplex base = random_acyclic_bicomplex(2, SpectralProfile::unit, 801);
    const double w = 40.0;  // fast phase drift: coarse stencils break the branch
    const DeformFamily fam =
        metric_family(base, Complex(0, w) * CMatrix::Identity(2, 2), CMatrix::Zero(2, 2));
    const double lambda = 3.0 * spectral_top(base);
    const CohBases bases = default_bases(make_split(base));
    const VariationReport report =
        variation_report(fam, {0.0, 0.3}, lambda, 0.1, bases);
    REQUIRE(report.rows.size() == 2);
    for (const VariationRow& row : report.rows) {
        CHECK_FALSE(row.error.empty());
        CHECK_FALSE(row.ok);
    }
    CHECK_FALSE(report.all_ok);
    CHECK(report.to_table().find("ERROR") != std::string::npos);
}

TEST_CASE("fd_rate flags a branch jump across a too-coarse stencil") {
    // Phase drifts fast when alpha has a large imaginary multiple of the
    // identity on one parity only.
    const BiComplex base = random_acyclic_bicomplex(2, SpectralProfile::unit, 600);
    const double w = 40.0;
    const DeformFamily fam =
        metric_family(base, Complex(0, w) * CMatrix::Identity(2, 2), CMatrix::Zero(2, 2));
    const double lambda = 3.0 * spectral_top(base);
    const CohBases bases = default_bases(make_split(base));
    CHECK_THROWS_AS(fd_rate(fam, 0.0, 0.1, lambda, RatePath::truncated_part, bases),
                    StencilError);
}
