#include "cmt/selftest.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "cmt/deform.hpp"
#include "cmt/detline.hpp"
#include "cmt/models.hpp"
#include "cmt/torsion.hpp"

namespace cmt {

namespace {

struct Checker {
    Checker(const char* name, std::uint64_t seed_) : seed(seed_) { result.name = name; }
    SuiteResult result;
    std::uint64_t seed;
    void check(bool ok, const std::string& what, std::uint64_t case_seed) {
        ++result.checks;
        if (!ok) {
            ++result.failures;
            std::ostringstream os;
            os << what << "  [reproduce: cmtorsion selftest --suite " << result.name << " --seed "
               << case_seed << "]";
            result.messages.push_back(os.str());
        }
    }
};

SuiteResult suite_numkit(std::uint64_t seed, const Tolerances& tols) {
    Checker c("numkit", seed);
    for (int trial = 0; trial < 6; ++trial) {
        const std::uint64_t s = seed + trial;
        SeededRng rng(s);
        const Index n = 3 + static_cast<Index>(trial % 4) * 3;
        const CMatrix a = rng.matrix(n, n);
        const ClusterResult cr = eig_clusters(a, tols.cluster_tol);
        Index total = 0;
        CMatrix psum = CMatrix::Zero(n, n);
        double cross = 0;
        for (size_t i = 0; i < cr.clusters.size(); ++i) {
            total += cr.clusters[i].alg_mult;
            psum += cr.clusters[i].projector;
            const CMatrix& p = cr.clusters[i].projector;
            c.check((p * p - p).norm() <= 1e-7 * std::max(1.0, p.norm()),
                    "cluster projector not idempotent", s);
            c.check((a * p - p * a).norm() <= 1e-7 * scale_of(a),
                    "cluster projector does not commute", s);
            for (size_t j = 0; j < cr.clusters.size(); ++j) {
                if (i != j) cross = std::max(cross, (p * cr.clusters[j].projector).norm());
            }
        }
        c.check(total == n, "algebraic multiplicities do not sum to dim", s);
        c.check((psum - CMatrix::Identity(n, n)).norm() <= 1e-9 * n, "projectors do not sum to 1", s);
        c.check(cross <= 1e-7, "projector products not mutually annihilating", s);

        const CMatrix b = rng.matrix(n, n);
        const Complex lhs = det(CMatrix(a * b));
        const Complex rhs = det(a) * det(b);
        c.check(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)) * 100,
                "det not multiplicative", s);

        const RankBasis rb = rank_basis(a.leftCols(n / 2 + 1) * rng.matrix(n / 2 + 1, n), tols.rank_tol);
        const RankBasis rb2 = rank_basis(rb.col_basis, tols.rank_tol);
        c.check(rb2.rank == rb.rank, "rank_basis not idempotent on its column basis", s);

        const CMatrix sa = rng.matrix(3, 3) + 5.0 * CMatrix::Identity(3, 3);
        const CMatrix sb = rng.matrix(2, 2) - 5.0 * CMatrix::Identity(2, 2);
        const CMatrix sc = rng.matrix(3, 2);
        const CMatrix x = sylvester(sa, sb, sc);
        c.check((sa * x - x * sb - sc).norm() <= 1e-11 * std::max(1.0, sc.norm()) * 100,
                "sylvester residual too large", s);
    }
    return c.result;
}

SuiteResult suite_detline(std::uint64_t seed, const Tolerances& tols) {
    Checker c("detline", seed);
    // Exhaustive swap signs for dims <= 6.
    for (Index dv = 0; dv <= 6; ++dv) {
        for (Index dw = 0; dw <= 6; ++dw) {
            const Index n = dv + dw;
            SeededRng rng(seed + static_cast<std::uint64_t>(dv * 16 + dw));
            const CMatrix vv = rng.matrix(n, dv);
            const CMatrix ww = rng.matrix(n, dw);
            std::vector<CVector> vw, wv;
            for (Index j = 0; j < dv; ++j) vw.push_back(vv.col(j));
            for (Index j = 0; j < dw; ++j) vw.push_back(ww.col(j));
            for (Index j = 0; j < dw; ++j) wv.push_back(ww.col(j));
            for (Index j = 0; j < dv; ++j) wv.push_back(vv.col(j));
            const CMatrix ref = CMatrix::Identity(n, n);
            const Complex a = wedge_coord(vw, ref, tols.rank_tol);
            const Complex b = wedge_coord(wv, ref, tols.rank_tol);
            const double sgn = fusion_sign(dv, dw);
            c.check(std::abs(a - sgn * b) <= 1e-9 * std::max(1.0, std::abs(a)),
                    "fusion swap sign violated", seed);
        }
    }
    // Alternating multilinearity.
    SeededRng rng(seed);
    for (int trial = 0; trial < 8; ++trial) {
        const Index n = 4;
        const CMatrix m = rng.matrix(n, n);
        std::vector<CVector> vs;
        for (Index j = 0; j < n; ++j) vs.push_back(m.col(j));
        const Complex base = wedge_coord(vs, CMatrix::Identity(n, n), tols.rank_tol);
        std::swap(vs[0], vs[2]);
        const Complex swapped = wedge_coord(vs, CMatrix::Identity(n, n), tols.rank_tol);
        c.check(std::abs(base + swapped) <= 1e-12 * std::max(1.0, std::abs(base)),
                "wedge_coord not alternating", seed + trial);
        std::swap(vs[0], vs[2]);
        const Complex s(1.7, -0.3);
        vs[1] *= s;
        const Complex scaled = wedge_coord(vs, CMatrix::Identity(n, n), tols.rank_tol);
        c.check(std::abs(scaled - s * base) <= 1e-12 * std::max(1.0, std::abs(base)),
                "wedge_coord not multilinear", seed + trial);
    }
    // Associativity of multi_fusion.
    DetElement e1{2, "a", Complex(2, 1), +1};
    DetElement e2{1, "b", Complex(0, 3), +1};
    DetElement e3{3, "c", Complex(-1, 0.5), +1};
    const DetElement left = multi_fusion({multi_fusion({e1, e2}), e3});
    const DetElement right = multi_fusion({e1, multi_fusion({e2, e3})});
    c.check(std::abs(left.coord - right.coord) == 0.0 && left.space_dim == right.space_dim,
            "multi_fusion not associative", seed);
    return c.result;
}

SuiteResult suite_bicomplex(std::uint64_t seed, const Tolerances& tols) {
    Checker c("bicomplex", seed);
    for (int trial = 0; trial < 6; ++trial) {
        const std::uint64_t s = seed + trial;
        const Index n = 3 + trial % 3;
        const BiComplex cx = random_bicomplex(n, n, trial % 2, trial % 2, SpectralProfile::unit, s);
        c.check(validate(cx, tols.validation_tol).pass, "random complex fails validation", s);
        auto [de, dod] = laplacian(cx);
        const double scale = std::max(scale_of(de), scale_of(dod));
        c.check((cx.d_eo * de - dod * cx.d_eo).norm() <= 1e-10 * scale, "d does not commute with Delta", s);
        c.check((cx.ds_eo * de - dod * cx.ds_eo).norm() <= 1e-10 * scale,
                "d* does not commute with Delta", s);

        double lambda = 0.5 * scale;
        for (int tries = 0; tries < 32; ++tries) {
            try {
                const SpectralSplit sp = spectral_truncate(cx, lambda, tols.cluster_tol, tols.rank_tol);
                c.check(sp.commute_residual <= 1e-8 * scale, "projector/differential commutator", s);
                for (int k = 0; k < 2; ++k) {
                    auto [cp, cm] = plus_minus_split(cx, sp, k, tols.rank_tol);
                    const size_t uk = static_cast<size_t>(k);
                    c.check(cp.cols() + cm.cols() == sp.basis_high[uk].cols(),
                            "plus/minus split dimensions", s);
                }
                break;
            } catch (const CutCollisionError&) {
                lambda *= 1.1;
            }
        }

        const DiffSplit coh = cohomology(cx, tols.rank_tol);
        const DiffSplit hom = homology(cx, tols.rank_tol);
        if (trial % 2 == 0) {
            // Acyclic target: dim B^k = dim B_{k-1}.
            for (int k = 0; k < 2; ++k) {
                c.check(coh.dim_b(k) == hom.dim_b(1 - k), "dim B^k != dim B_{k-1} on acyclic", s);
            }
        }
    }
    return c.result;
}

SuiteResult suite_torsion(std::uint64_t seed, const Tolerances& tols) {
    Checker c("torsion", seed);
    TorsionOptions opts;
    opts.tols = tols;
    for (int trial = 0; trial < 12; ++trial) {
        const std::uint64_t s = seed + 100 + trial;
        const Index n = 2 + trial % 5;
        const BiComplex cx = random_acyclic_bicomplex(n, SpectralProfile::unit, s);
        const Complex a = torsion_definition(cx, opts).coord;
        const Complex b = torsion_acyclic(cx, tols.rank_tol);
        c.check(std::abs(a - b) <= 1e-8 * std::abs(b), "definitional != acyclic product formula", s);
    }
    for (int trial = 0; trial < 4; ++trial) {
        const std::uint64_t s = seed + 200 + trial;
        const BiComplex cx = random_bicomplex(4, 4, 1, 1, SpectralProfile::unit, s);
        auto [de, dod] = laplacian(cx);
        const double top = std::max(scale_of(de), scale_of(dod));
        const Complex ref = torsion_truncated(cx, 2.0 * top, opts).value.coord;
        for (double frac : {0.9, 0.5, 0.1}) {
            try {
                const Complex v = torsion_truncated(cx, frac * top, opts).value.coord;
                c.check(std::abs(v - ref) <= 1e-7 * std::abs(ref), "lambda-independence violated", s);
            } catch (const CutCollisionError&) {
                // skip colliding cuts
            }
        }
    }
    // Theta-independence of the Agmon determinant.
    SeededRng rng(seed);
    for (int trial = 0; trial < 6; ++trial) {
        const Index n = 5;
        CMatrix t = rng.matrix(n, n);
        t = t.triangularView<Eigen::Upper>();
        Complex prod(1, 0);
        for (Index i = 0; i < n; ++i) {
            // Eigenvalues away from the three test rays.
            const double angle = rng.uniform(0.3, 0.7) + (i % 2) * 3.0;
            const double mod = rng.uniform(0.5, 2.0);
            t(i, i) = Complex(mod * std::cos(angle), mod * std::sin(angle));
            prod *= t(i, i);
        }
        const CMatrix q = rng.unitary(n);
        const CMatrix a = q * t * q.adjoint();
        for (double theta : {3.14159265358979323846 / 4, 3.14159265358979323846,
                             7 * 3.14159265358979323846 / 4}) {
            const Complex ld = agmon_log_det(a, theta, tols.rank_tol);
            c.check(std::abs(std::exp(ld) - prod) <= 1e-10 * std::abs(prod) * 100,
                    "agmon determinant != eigenvalue product", seed + trial);
        }
    }
    return c.result;
}

SuiteResult suite_models(std::uint64_t seed, const Tolerances& tols) {
    Checker c("models", seed);
    SeededRng rng(seed);
    for (int m = 1; m <= 5; ++m) {
        const Eigen::MatrixXd g = (0.4 * rng.sym_real(m, 1.0)).exp();
        const CMatrix gamma = chirality(m, g);
        const Index n = Index(1) << m;
        c.check((gamma * gamma - CMatrix::Identity(n, n)).norm() <= 1e-12 * n,
                "Gamma^2 != Id", seed + static_cast<std::uint64_t>(m));
    }
    for (int trial = 0; trial < 4; ++trial) {
        const std::uint64_t s = seed + trial;
        const int m = 3 + (trial % 2) * 2;
        std::vector<FormComponent> comps;
        comps.push_back({0b111u, Complex(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))});
        if (m == 5) comps.push_back({0b11111u, Complex(rng.uniform(-1.0, 1.0), 0)});
        const CVector flux = make_form(m, comps);
        const TorusModel tm = torus_model(m, Eigen::MatrixXd::Identity(m, m), flux);
        c.check(validate(tm.complex, tols.validation_tol).pass, "torus model fails validation", s);
        const WedgeModel& w = tm.wedge;
        const CMatrix hw = w.wedge_operator(flux);
        c.check((hw * hw).norm() == 0.0, "odd flux wedge does not square to zero exactly", s);
        // eps_b inverse property.
        const CVector b = make_form(m, {{0b11u, Complex(0.3, 0.1)}, {0u, Complex(0.2, 0)}});
        const CMatrix e_plus = eps_b(w, b);
        const CMatrix e_minus = eps_b(w, CVector(-b));
        c.check((e_plus * e_minus - CMatrix::Identity(w.full_dim(), w.full_dim())).norm() <=
                    1e-12 * w.full_dim(),
                "eps_B eps_{-B} != Id", s);
        c.check((e_plus * hw - hw * e_plus).norm() <= 1e-12 * std::max(1.0, hw.norm()),
                "eps_B does not commute with the flux wedge", s);
    }
    // Generator determinism.
    const BiComplex r1 = random_bicomplex(4, 4, 1, 1, SpectralProfile::unit, seed);
    const BiComplex r2 = random_bicomplex(4, 4, 1, 1, SpectralProfile::unit, seed);
    c.check(r1.d_eo == r2.d_eo && r1.ds_oe == r2.ds_oe, "random_bicomplex not deterministic", seed);
    return c.result;
}

SuiteResult suite_deform(std::uint64_t seed, const Tolerances& tols) {
    Checker c("deform", seed);
    for (int trial = 0; trial < 4; ++trial) {
        const std::uint64_t s = seed + trial;
        SeededRng rng(s);
        const Index n = 3;
        const BiComplex base = random_acyclic_bicomplex(n, SpectralProfile::unit, s);
        auto [de, dod] = laplacian(base);
        const double lambda = 3.0 * std::max(scale_of(de), scale_of(dod));
        const CohBases bases = default_bases(make_split(base, tols.rank_tol));

        const CMatrix a0 = 0.3 * rng.matrix(n, n);
        const CMatrix a1 = 0.3 * rng.matrix(n, n);
        const DeformFamily mf = metric_family(base, a0, a1);
        const Complex pred = predicted_rate(mf, 0.1, lambda, tols);
        const Complex fd = fd_rate(mf, 0.1, 1e-3, lambda, RatePath::truncated_part, bases, tols);
        c.check(std::abs(fd - pred) <= 10.0 * 1e-6 * std::max(1.0, std::abs(pred)),
                "metric family: fd rate disagrees with the variation lemma", s);

        const DeformFamily ff = flux_family(base, a1, a0);
        const Complex predf = predicted_rate(ff, 0.05, lambda, tols);
        const Complex fdf = fd_rate(ff, 0.05, 1e-3, lambda, RatePath::truncated_part, bases, tols);
        c.check(std::abs(fdf - predf) <= 10.0 * 1e-6 * std::max(1.0, std::abs(predf)),
                "flux family: fd rate disagrees with the variation lemma", s);

        // Exact intertwining: conjugated differentials still square to zero.
        const BiComplex moved = ff.complex_at(0.4);
        c.check(validate(moved, 1e-11).pass, "conjugated complex loses square-zero", s);
    }
    return c.result;
}

}  // namespace

std::vector<SuiteResult> run_selftest(const SelftestOptions& opts) {
    std::vector<SuiteResult> out;
    auto want = [&](const char* name) { return opts.suite.empty() || opts.suite == name; };
    if (want("numkit")) out.push_back(suite_numkit(opts.seed, opts.tols));
    if (want("detline")) out.push_back(suite_detline(opts.seed, opts.tols));
    if (want("bicomplex")) out.push_back(suite_bicomplex(opts.seed, opts.tols));
    if (want("torsion")) out.push_back(suite_torsion(opts.seed, opts.tols));
    if (want("models")) out.push_back(suite_models(opts.seed, opts.tols));
    if (want("deform")) out.push_back(suite_deform(opts.seed, opts.tols));
    return out;
}

}  // namespace cmt
