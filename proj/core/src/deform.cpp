#include "cmt/deform.hpp"

#include <cmath>
#include <future>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace cmt {

namespace {

constexpr double kPi = 3.14159265358979323846;

CMatrix expm(const CMatrix& a) { return a.exp(); }

double principal(double angle) {
    while (angle > kPi) angle -= 2.0 * kPi;
    while (angle < -kPi) angle += 2.0 * kPi;
    return angle;
}

}  // namespace

DeformFamily metric_family(BiComplex base, CMatrix alpha0, CMatrix alpha1) {
    if (alpha0.rows() != base.n0 || alpha0.cols() != base.n0 || alpha1.rows() != base.n1 ||
        alpha1.cols() != base.n1) {
        throw ShapeError("metric_family: alpha blocks must match the parity dimensions");
    }
    DeformFamily f;
    f.kind = DeformFamily::Kind::metric_conjugation;
    f.base = std::move(base);
    f.gen0 = std::move(alpha0);
    f.gen1 = std::move(alpha1);
    return f;
}

DeformFamily flux_family(BiComplex base, CMatrix beta0, CMatrix beta1) {
    if (beta0.rows() != base.n0 || beta0.cols() != base.n0 || beta1.rows() != base.n1 ||
        beta1.cols() != base.n1) {
        throw ShapeError("flux_family: beta blocks must match the parity dimensions");
    }
    DeformFamily f;
    f.kind = DeformFamily::Kind::flux_conjugation;
    f.base = std::move(base);
    f.gen0 = std::move(beta0);
    f.gen1 = std::move(beta1);
    return f;
}

DeformFamily torus_metric_family(int m, CVector flux,
                                 std::function<Eigen::MatrixXd(double)> metric_path,
                                 int orientation) {
    DeformFamily f;
    f.kind = DeformFamily::Kind::torus_metric;
    f.torus_m = m;
    f.torus_orientation = orientation;
    f.torus_flux = std::move(flux);
    f.metric_path = std::move(metric_path);
    const TorusModel t0 = torus_model(m, f.metric_path(0.0), f.torus_flux, orientation);
    f.base = t0.complex;
    f.gamma_base = t0.gamma_full;
    return f;
}

BiComplex DeformFamily::complex_at(double t) const {
    switch (kind) {
        case Kind::metric_conjugation: {
            BiComplex c = base;
            const CMatrix em0 = expm(CMatrix(-t * gen0)), ep0 = expm(CMatrix(t * gen0));
            const CMatrix em1 = expm(CMatrix(-t * gen1)), ep1 = expm(CMatrix(t * gen1));
            c.ds_eo = em1 * base.ds_eo * ep0;
            c.ds_oe = em0 * base.ds_oe * ep1;
            return c;
        }
        case Kind::flux_conjugation: {
            BiComplex c = base;
            const CMatrix em0 = expm(CMatrix(-t * gen0)), ep0 = expm(CMatrix(t * gen0));
            const CMatrix em1 = expm(CMatrix(-t * gen1)), ep1 = expm(CMatrix(t * gen1));
            c.d_eo = ep1 * base.d_eo * em0;
            c.d_oe = ep0 * base.d_oe * em1;
            c.ds_eo = em1 * base.ds_eo * ep0;
            c.ds_oe = em0 * base.ds_oe * ep1;
            return c;
        }
        case Kind::torus_metric:
            return torus_model(torus_m, metric_path(t), torus_flux, torus_orientation).complex;
    }
    throw ContractError("DeformFamily: unknown kind");
}

std::pair<CMatrix, CMatrix> DeformFamily::generator_at(double t) const {
    if (kind != Kind::torus_metric) return {gen0, gen1};
    // alpha_u = Gamma(u) dGamma/du, degree-preserving; central difference.
    const double h = 1e-6;
    const WedgeModel w_mid(torus_m, metric_path(t), torus_orientation);
    const CMatrix g_mid = w_mid.chirality();
    const CMatrix g_plus = WedgeModel(torus_m, metric_path(t + h), torus_orientation).chirality();
    const CMatrix g_minus = WedgeModel(torus_m, metric_path(t - h), torus_orientation).chirality();
    const CMatrix dgamma = (g_plus - g_minus) / (2.0 * h);
    const CMatrix alpha_full = g_mid * dgamma;
    // alpha is degree-preserving: take the diagonal parity blocks.
    const std::vector<Index> even = w_mid.parity_indices(0);
    const std::vector<Index> odd = w_mid.parity_indices(1);
    auto take = [&](const std::vector<Index>& idx) {
        CMatrix out(static_cast<Index>(idx.size()), static_cast<Index>(idx.size()));
        for (size_t i = 0; i < idx.size(); ++i) {
            for (size_t j = 0; j < idx.size(); ++j) {
                out(static_cast<Index>(i), static_cast<Index>(j)) = alpha_full(idx[i], idx[j]);
            }
        }
        return out;
    };
    return {take(even), take(odd)};
}

CohBases DeformFamily::bases_at(double t, const CohBases& base_bases) const {
    CohBases out = base_bases;
    switch (kind) {
        case Kind::metric_conjugation: {
            const CMatrix em0 = expm(CMatrix(-t * gen0)), em1 = expm(CMatrix(-t * gen1));
            out.hom[0] = em0 * base_bases.hom[0];
            out.hom[1] = em1 * base_bases.hom[1];
            return out;
        }
        case Kind::flux_conjugation: {
            const CMatrix em0 = expm(CMatrix(-t * gen0)), ep0 = expm(CMatrix(t * gen0));
            const CMatrix em1 = expm(CMatrix(-t * gen1)), ep1 = expm(CMatrix(t * gen1));
            out.coh[0] = ep0 * base_bases.coh[0];
            out.coh[1] = ep1 * base_bases.coh[1];
            out.hom[0] = em0 * base_bases.hom[0];
            out.hom[1] = em1 * base_bases.hom[1];
            return out;
        }
        case Kind::torus_metric: {
            const WedgeModel w(torus_m, metric_path(t), torus_orientation);
            const CMatrix transport = w.chirality() * gamma_base;
            for (int k = 0; k < 2; ++k) {
                const size_t uk = static_cast<size_t>(k);
                if (base_bases.hom[uk].cols() == 0) continue;
                const CMatrix full = w.embed_cols(k, base_bases.hom[uk]);
                out.hom[uk] = w.extract_cols(k, transport * full);
            }
            return out;
        }
    }
    throw ContractError("DeformFamily: unknown kind");
}

std::string DeformFamily::transport_name() const {
    switch (kind) {
        case Kind::metric_conjugation:
            return "coh fixed; hom by exp(-u alpha)";
        case Kind::flux_conjugation:
            return "coh by exp(v beta); hom by exp(-v beta)";
        case Kind::torus_metric:
            return "coh fixed; hom by Gamma(u) Gamma(0)";
    }
    return "?";
}

Complex supertrace(const CMatrix& op0, const CMatrix& op1) {
    return op0.trace() - op1.trace();
}

Complex supertrace(const CMatrix& op0, const CMatrix& op1, const CMatrix& proj0,
                   const CMatrix& proj1, double commute_tol) {
    if (op0.rows() != proj0.rows() || op1.rows() != proj1.rows()) {
        throw ShapeError("supertrace: projector shapes do not match");
    }
    if (commute_tol > 0) {
        const double r0 = (op0 * proj0 - proj0 * op0).norm();
        const double r1 = (op1 * proj1 - proj1 * op1).norm();
        const double scale = std::max({1.0, op0.norm(), op1.norm()});
        if (r0 > commute_tol * scale || r1 > commute_tol * scale) {
            throw RestrictionError("supertrace: projector does not commute with the operator");
        }
    }
    return (op0 * proj0).trace() - (op1 * proj1).trace();
}

Complex predicted_rate(const DeformFamily& f, double t0, double lambda, const Tolerances& tols) {
    const BiComplex c = f.complex_at(t0);
    const SpectralSplit s = spectral_truncate(c, lambda, tols.cluster_tol, tols.rank_tol);
    auto [g0, g1] = f.generator_at(t0);
    // Metric-type laws move d* only: rate -str(alpha | [0,lambda]).  The flux
    // law conjugates both differentials, and each contributes the same
    // supertrace; the acyclic case (canonical determinant lines, no
    // transport freedom) forces the factor two.
    const double factor = f.kind == DeformFamily::Kind::flux_conjugation ? 2.0 : 1.0;
    return -factor * supertrace(g0, g1, s.proj_low[0], s.proj_low[1]);
}

namespace {

Complex torsion_at(const DeformFamily& f, double t, double lambda, RatePath path,
                   const CohBases& base_bases, const Tolerances& tols) {
    TorsionOptions opts;
    opts.tols = tols;
    opts.bases = f.bases_at(t, base_bases);
    const TruncatedTorsion tt = torsion_truncated(f.complex_at(t), lambda, opts);
    return path == RatePath::full_assembly ? tt.value.coord : tt.low_coord;
}

}  // namespace

Complex fd_rate(const DeformFamily& f, double t0, double eps, double lambda, RatePath path,
                const CohBases& base_bases, const Tolerances& tols) {
    if (eps <= 0) throw ContractError("fd_rate: eps must be positive");
    const Complex v_minus = torsion_at(f, t0 - eps, lambda, path, base_bases, tols);
    const Complex v_center = torsion_at(f, t0, lambda, path, base_bases, tols);
    const Complex v_plus = torsion_at(f, t0 + eps, lambda, path, base_bases, tols);
    for (const Complex& v : {v_minus, v_center, v_plus}) {
        if (!(std::abs(v) > 0)) throw DegeneracyError("fd_rate: torsion vanished on the stencil");
    }
    const double phi0 = std::arg(v_center);
    const double dplus = principal(std::arg(v_plus) - phi0);
    const double dminus = principal(std::arg(v_minus) - phi0);
    if (std::abs(dplus) + std::abs(dminus) > kPi) {
        throw StencilError("fd_rate: branch jump across the stencil exceeds pi; shrink eps");
    }
    const Complex log_plus(std::log(std::abs(v_plus)), phi0 + dplus);
    const Complex log_minus(std::log(std::abs(v_minus)), phi0 + dminus);
    return (log_plus - log_minus) / (2.0 * eps);
}

VariationReport variation_report(const DeformFamily& f, const std::vector<double>& grid,
                                 double lambda, double eps, const CohBases& base_bases,
                                 const VariationPolicy& policy, const Tolerances& tols,
                                 int threads) {
    VariationReport report;
    report.lambda = lambda;
    report.eps = eps;
    report.transport = f.transport_name();
    report.rows.resize(grid.size());

    auto eval_point = [&](size_t i) {
        VariationRow row;
        row.t = grid[i];
        try {
            row.predicted = predicted_rate(f, row.t, lambda, tols);
            row.fd_truncated = fd_rate(f, row.t, eps, lambda, RatePath::truncated_part,
                                       base_bases, tols);
            row.fd_full = fd_rate(f, row.t, eps, lambda, RatePath::full_assembly, base_bases, tols);
            row.local_residual = row.fd_full - row.fd_truncated;
            TorsionOptions opts;
            opts.tols = tols;
            opts.bases = f.bases_at(row.t, base_bases);
            row.tau_full = torsion_truncated(f.complex_at(row.t), lambda, opts).value.coord;
            row.abs_mismatch = std::abs(row.fd_truncated - row.predicted);
            const double denom = std::max(1.0, std::abs(row.predicted));
            row.rel_mismatch = row.abs_mismatch / denom;
            row.ok = row.abs_mismatch <= policy.mismatch_scale * eps * eps * denom;
            if (policy.full_rate_bound && std::abs(row.fd_full) > *policy.full_rate_bound) {
                row.ok = false;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
            row.ok = false;
        }
        return row;
    };

    if (threads > 1 && grid.size() > 1) {
        std::vector<std::future<VariationRow>> futures;
        futures.reserve(grid.size());
        for (size_t i = 0; i < grid.size(); ++i) {
            futures.push_back(std::async(std::launch::async, eval_point, i));
        }
        for (size_t i = 0; i < grid.size(); ++i) report.rows[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < grid.size(); ++i) report.rows[i] = eval_point(i);
    }

    report.all_ok = true;
    for (size_t i = 0; i < report.rows.size(); ++i) {
        if (!report.rows[i].ok) report.all_ok = false;
        if (i > 0 && report.rows[i].error.empty() && report.rows[i - 1].error.empty()) {
            const double jump =
                principal(std::arg(report.rows[i].tau_full) - std::arg(report.rows[i - 1].tau_full));
            if (std::abs(jump) > kPi / 2) report.grid_advice = true;
        }
    }
    return report;
}

std::string VariationReport::to_table() const {
    std::ostringstream os;
    os << "# lambda=" << lambda << " eps=" << eps << " transport=[" << transport << "]\n";
    os << "#       t        predicted                fd(truncated)            |mismatch|  "
          "local-residual           |tau_full|\n";
    os.setf(std::ios::scientific);
    os.precision(6);
    for (const VariationRow& r : rows) {
        if (!r.error.empty()) {
            os << r.t << "  ERROR: " << r.error << "\n";
            continue;
        }
        os << r.t << "  (" << r.predicted.real() << "," << r.predicted.imag() << ")  ("
           << r.fd_truncated.real() << "," << r.fd_truncated.imag() << ")  " << r.abs_mismatch
           << "  (" << r.local_residual.real() << "," << r.local_residual.imag() << ")  "
           << std::abs(r.tau_full) << (r.ok ? "" : "  [POLICY-FAIL]") << "\n";
    }
    if (grid_advice) {
        os << "# note: tau phase jumped by more than pi/2 between grid points; refine the grid\n";
    }
    return os.str();
}

}  // namespace cmt
