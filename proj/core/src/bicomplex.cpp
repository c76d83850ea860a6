#include "cmt/bicomplex.hpp"

#include <cmath>
#include <sstream>

namespace cmt {

BiComplex zero_bicomplex(Index n0, Index n1) {
    BiComplex c;
    c.n0 = n0;
    c.n1 = n1;
    c.d_eo = CMatrix::Zero(n1, n0);
    c.d_oe = CMatrix::Zero(n0, n1);
    c.ds_eo = CMatrix::Zero(n1, n0);
    c.ds_oe = CMatrix::Zero(n0, n1);
    return c;
}

namespace {

CMatrix block_diag(const CMatrix& x, const CMatrix& y) {
    CMatrix out = CMatrix::Zero(x.rows() + y.rows(), x.cols() + y.cols());
    out.topLeftCorner(x.rows(), x.cols()) = x;
    out.bottomRightCorner(y.rows(), y.cols()) = y;
    return out;
}

CMatrix hcat(const CMatrix& x, const CMatrix& y) {
    CMatrix out(x.rows(), x.cols() + y.cols());
    out.leftCols(x.cols()) = x;
    out.rightCols(y.cols()) = y;
    return out;
}

}  // namespace

BiComplex block_sum(const BiComplex& a, const BiComplex& b) {
    BiComplex c;
    c.n0 = a.n0 + b.n0;
    c.n1 = a.n1 + b.n1;
    c.d_eo = block_diag(a.d_eo, b.d_eo);
    c.d_oe = block_diag(a.d_oe, b.d_oe);
    c.ds_eo = block_diag(a.ds_eo, b.ds_eo);
    c.ds_oe = block_diag(a.ds_oe, b.ds_oe);
    return c;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    os << "square-zero residuals (tol " << tol << "):\n"
       << "  d.d   even->even: " << res_dd_even << "\n"
       << "  d.d   odd->odd:   " << res_dd_odd << "\n"
       << "  d*.d* even->even: " << res_dsds_even << "\n"
       << "  d*.d* odd->odd:   " << res_dsds_odd << "\n"
       << "  verdict: " << (pass ? "pass" : "FAIL");
    return os.str();
}

ValidationReport validate(const BiComplex& c, double validation_tol) {
    ValidationReport r;
    r.shapes_ok = c.d_eo.rows() == c.n1 && c.d_eo.cols() == c.n0 && c.d_oe.rows() == c.n0 &&
                  c.d_oe.cols() == c.n1 && c.ds_eo.rows() == c.n1 && c.ds_eo.cols() == c.n0 &&
                  c.ds_oe.rows() == c.n0 && c.ds_oe.cols() == c.n1;
    if (!r.shapes_ok) {
        r.pass = false;
        return r;
    }
    const double scale_d = std::max(1.0, c.d_eo.norm() * c.d_oe.norm());
    const double scale_ds = std::max(1.0, c.ds_eo.norm() * c.ds_oe.norm());
    r.tol = validation_tol * std::max(scale_d, scale_ds);
    r.res_dd_even = (c.d_oe * c.d_eo).norm();
    r.res_dd_odd = (c.d_eo * c.d_oe).norm();
    r.res_dsds_even = (c.ds_oe * c.ds_eo).norm();
    r.res_dsds_odd = (c.ds_eo * c.ds_oe).norm();
    r.pass = r.res_dd_even <= validation_tol * scale_d && r.res_dd_odd <= validation_tol * scale_d &&
             r.res_dsds_even <= validation_tol * scale_ds &&
             r.res_dsds_odd <= validation_tol * scale_ds;
    return r;
}

std::pair<CMatrix, CMatrix> laplacian(const BiComplex& c) {
    CMatrix even = c.ds_oe * c.d_eo + c.d_oe * c.ds_eo;
    CMatrix odd = c.d_eo * c.ds_oe + c.ds_eo * c.d_oe;
    return {std::move(even), std::move(odd)};
}

namespace {

// Shared construction for both differentials: `out[k]` maps parity k
// forward along the differential, `in[k]` maps into parity k.
DiffSplit diff_split(const std::array<const CMatrix*, 2>& out,
                     const std::array<const CMatrix*, 2>& in, double rank_tol,
                     double scale_floor) {
    DiffSplit s;
    for (size_t k = 0; k < 2; ++k) {
        const RankBasis rb_out = rank_basis(*out[k], rank_tol, scale_floor);
        const RankBasis rb_in = rank_basis(*in[k], rank_tol, scale_floor);
        s.rank_warning = s.rank_warning || rb_out.ambiguous || rb_in.ambiguous;
        s.b[k] = rb_in.col_basis;
        s.a[k] = rb_out.row_basis;
        // Lift H: complement of the image inside the kernel, orthogonal choice.
        // The kernel basis is orthonormal, so genuine lift directions keep
        // O(1) residuals against span(B); floor the rank scale accordingly.
        const CMatrix& ker = rb_out.null_basis;
        CMatrix resid = ker - s.b[k] * (s.b[k].adjoint() * ker);
        const RankBasis rb_h = rank_basis(resid, rank_tol, 1.0);
        s.h[k] = rb_h.col_basis;
        const Index expected = ker.cols() - s.b[k].cols();
        if (rb_h.rank != expected) {
            throw DegeneracyError("diff_split: kernel/image rank decisions disagree (parity " +
                                  std::to_string(k) + "): lift rank " + std::to_string(rb_h.rank) +
                                  " expected " + std::to_string(expected));
        }
    }
    return s;
}

}  // namespace

DiffSplit cohomology(const BiComplex& c, double rank_tol, double scale_floor) {
    return diff_split({&c.d_eo, &c.d_oe}, {&c.d_oe, &c.d_eo}, rank_tol, scale_floor);
}

DiffSplit homology(const BiComplex& c, double rank_tol, double scale_floor) {
    return diff_split({&c.ds_eo, &c.ds_oe}, {&c.ds_oe, &c.ds_eo}, rank_tol, scale_floor);
}

SplitData make_split(const BiComplex& c, double rank_tol, double scale_floor) {
    return {cohomology(c, rank_tol, scale_floor), homology(c, rank_tol, scale_floor)};
}

SpectralSplit spectral_truncate(const BiComplex& c, double lambda, double cluster_tol,
                                double rank_tol) {
    (void)rank_tol;
    if (lambda < 0) throw ContractError("spectral_truncate: lambda must be >= 0");
    auto [delta_even, delta_odd] = laplacian(c);
    const double scale = std::max(scale_of(delta_even), scale_of(delta_odd));

    SpectralSplit s;
    s.lambda_cut = lambda;
    const std::array<CMatrix, 2> deltas = {std::move(delta_even), std::move(delta_odd)};
    for (size_t k = 0; k < 2; ++k) {
        const Index n = c.dim(static_cast<int>(k));
        ClusterResult cr = eig_clusters(deltas[k], cluster_tol);
        s.gap_warning = s.gap_warning || cr.gap_warning;
        CMatrix p_low = CMatrix::Zero(n, n), p_high = CMatrix::Zero(n, n);
        CMatrix b_low(n, 0), b_high(n, 0);
        for (const SpectralCluster& cl : cr.clusters) {
            // The interval is closed at 0: a cluster at zero (up to tolerance)
            // belongs to [0, lambda] for every lambda >= 0 and never collides.
            const bool zero_cluster = std::abs(cl.center) <= cluster_tol * scale;
            for (const Complex& ev : cl.eigenvalues) {
                s.eigenvalues[k].push_back(ev);
                if (!zero_cluster && std::abs(std::abs(ev) - lambda) <= cluster_tol * scale) {
                    std::ostringstream os;
                    os << "spectral_truncate: cut " << lambda
                       << " collides with eigenvalue " << ev.real();
                    if (ev.imag() != 0) os << (ev.imag() < 0 ? "-" : "+") << std::abs(ev.imag()) << "i";
                    throw CutCollisionError(os.str(), ev);
                }
            }
            if (zero_cluster || std::abs(cl.center) <= lambda) {
                p_low += cl.projector;
                b_low = hcat(b_low, cl.basis);
            } else {
                p_high += cl.projector;
                b_high = hcat(b_high, cl.basis);
            }
        }
        if (n == 0) {
            p_low = p_high = CMatrix::Zero(0, 0);
        }
        s.proj_low[k] = std::move(p_low);
        s.proj_high[k] = std::move(p_high);
        s.basis_low[k] = std::move(b_low);
        s.basis_high[k] = std::move(b_high);
    }

    // The invariant-subspace quality of the cut: projectors must commute
    // with both differentials (they do exactly in exact arithmetic).
    double res = 0;
    res = std::max(res, (c.d_eo * s.proj_low[0] - s.proj_low[1] * c.d_eo).norm());
    res = std::max(res, (c.d_oe * s.proj_low[1] - s.proj_low[0] * c.d_oe).norm());
    res = std::max(res, (c.ds_eo * s.proj_low[0] - s.proj_low[1] * c.ds_eo).norm());
    res = std::max(res, (c.ds_oe * s.proj_low[1] - s.proj_low[0] * c.ds_oe).norm());
    s.commute_residual = res;
    return s;
}

namespace {

// Coefficients of (op * basis_from) in basis_to, with invariance residual check.
CMatrix restrict_op(const CMatrix& op, const CMatrix& basis_from, const CMatrix& basis_to,
                    const char* what) {
    double residual = 0;
    CMatrix coeff = solve_ls(basis_to, op * basis_from, &residual);
    const double scale = std::max(1.0, op.norm() * std::max(1.0, basis_from.norm()));
    if (residual > 1e-6 * scale) {
        throw DegeneracyError(std::string(what) +
                              ": subspace not invariant (residual " + std::to_string(residual) + ")");
    }
    return coeff;
}

}  // namespace

std::pair<CMatrix, CMatrix> plus_minus_split(const BiComplex& c, const SpectralSplit& s,
                                             int parity, double rank_tol) {
    const size_t k = static_cast<size_t>(parity);
    const CMatrix& w = s.basis_high[k];
    const CMatrix& w_next = s.basis_high[1 - k];  // both d and d* flip parity
    const CMatrix ds_coeff = restrict_op(c.ds_outof(parity), w, w_next, "plus_minus_split[d*]");
    const CMatrix d_coeff = restrict_op(c.d_outof(parity), w, w_next, "plus_minus_split[d]");
    // Rank scales floored by the unrestricted operator norms: a restriction
    // that vanishes only up to solve noise must count as zero.
    const RankBasis rb_plus = rank_basis(ds_coeff, rank_tol, c.ds_outof(parity).norm());
    const RankBasis rb_minus = rank_basis(d_coeff, rank_tol, c.d_outof(parity).norm());
    CMatrix c_plus = w * rb_plus.null_basis;
    CMatrix c_minus = w * rb_minus.null_basis;
    if (c_plus.cols() + c_minus.cols() != w.cols()) {
        throw DegeneracyError("plus_minus_split: Ker d* + Ker d does not fill the tail");
    }
    if (w.cols() > 0) {
        const CMatrix joint = hcat(c_plus, c_minus);
        const RankBasis rb = rank_basis(joint, rank_tol);
        if (rb.rank != w.cols()) {
            throw DegeneracyError("plus_minus_split: direct sum check failed");
        }
    }
    return {std::move(c_plus), std::move(c_minus)};
}

TruncatedComplex truncated_complex(const BiComplex& c, const SpectralSplit& s) {
    TruncatedComplex t;
    t.basis = s.basis_low;
    const CMatrix& v0 = t.basis[0];
    const CMatrix& v1 = t.basis[1];
    t.low.n0 = v0.cols();
    t.low.n1 = v1.cols();
    t.low.d_eo = restrict_op(c.d_eo, v0, v1, "truncated_complex[d_eo]");
    t.low.d_oe = restrict_op(c.d_oe, v1, v0, "truncated_complex[d_oe]");
    t.low.ds_eo = restrict_op(c.ds_eo, v0, v1, "truncated_complex[ds_eo]");
    t.low.ds_oe = restrict_op(c.ds_oe, v1, v0, "truncated_complex[ds_oe]");
    return t;
}

}  // namespace cmt
