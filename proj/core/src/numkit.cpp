#include "cmt/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cmt {

namespace {

std::string shape_str(const CMatrix& a) {
    std::ostringstream os;
    os << a.rows() << "x" << a.cols();
    return os.str();
}

}  // namespace

double scale_of(const CMatrix& a) {
    return std::max(1.0, a.norm());
}

void ensure_finite(const CMatrix& a, const char* context) {
    if (!a.allFinite()) {
        throw ShapeError(std::string(context) + ": non-finite entries");
    }
}

SchurResult schur(const CMatrix& a) {
    if (a.rows() != a.cols()) {
        throw ShapeError("schur: expected square matrix, got " + shape_str(a));
    }
    ensure_finite(a, "schur");
    if (a.rows() == 0) {
        return {CMatrix(0, 0), CMatrix(0, 0)};
    }
    Eigen::ComplexSchur<CMatrix> cs(a, /*computeU=*/true);
    if (cs.info() != Eigen::Success) {
        std::ostringstream os;
        os << "schur: QR iteration did not converge within "
           << Eigen::ComplexSchur<CMatrix>::m_maxIterationsPerRow * a.rows()
           << " sweeps (dim " << a.rows() << ")";
        throw ConvergenceError(os.str());
    }
    return {cs.matrixU(), cs.matrixT()};
}

std::vector<Complex> eigenvalues(const CMatrix& a) {
    SchurResult s = schur(a);
    std::vector<Complex> out(static_cast<size_t>(a.rows()));
    for (Index i = 0; i < a.rows(); ++i) out[static_cast<size_t>(i)] = s.t(i, i);
    return out;
}

namespace {

// Swaps the eigenvalues at diagonal positions (k, k+1) of the triangular
// factor by a 2x2 unitary similarity, updating t and q in place.
void swap_adjacent(CMatrix& t, CMatrix& q, Index k) {
    const Complex t11 = t(k, k), t12 = t(k, k + 1), t22 = t(k + 1, k + 1);
    // Unit eigenvector of [[t11,t12],[0,t22]] for t22 becomes the new first column.
    Complex v0 = t12, v1 = t22 - t11;
    const double nrm = std::sqrt(std::norm(v0) + std::norm(v1));
    if (nrm == 0.0) return;  // equal eigenvalues, fully decoupled: nothing to do
    v0 /= nrm;
    v1 /= nrm;
    Eigen::Matrix2cd u;
    u << v0, -std::conj(v1), v1, std::conj(v0);

    const Index n = t.rows();
    t.block(0, k, n, 2) = (t.block(0, k, n, 2) * u).eval();
    t.block(k, 0, 2, n) = (u.adjoint() * t.block(k, 0, 2, n)).eval();
    q.block(0, k, n, 2) = (q.block(0, k, n, 2) * u).eval();
    t(k + 1, k) = Complex(0, 0);
}

// Reorders the Schur form so that the diagonal positions flagged in
// `select` come first, preserving relative order inside each group.
Index reorder_schur(CMatrix& t, CMatrix& q, std::vector<char>& select) {
    const Index n = t.rows();
    Index front = 0;
    for (Index i = 0; i < n; ++i) {
        if (!select[static_cast<size_t>(i)]) continue;
        for (Index j = i; j > front; --j) {
            swap_adjacent(t, q, j - 1);
            std::swap(select[static_cast<size_t>(j - 1)], select[static_cast<size_t>(j)]);
        }
        ++front;
    }
    return front;
}

CMatrix sylvester_triangular(const CMatrix& a, const CMatrix& b, const CMatrix& c) {
    const Index p = a.rows(), r = b.rows();
    CMatrix x(p, r);
    for (Index j = 0; j < r; ++j) {
        CVector rhs = c.col(j);
        for (Index i = 0; i < j; ++i) rhs += x.col(i) * b(i, j);
        // Back substitution on (a - b_jj I) x_j = rhs.
        const Complex shift = b(j, j);
        for (Index k = p - 1; k >= 0; --k) {
            Complex s = rhs(k);
            for (Index l = k + 1; l < p; ++l) s -= a(k, l) * x(l, j);
            const Complex diag = a(k, k) - shift;
            if (std::abs(diag) < 1e-14 * (std::abs(a(k, k)) + std::abs(shift) + 1.0)) {
                throw SpectraOverlapError("sylvester: spectra of A and B overlap");
            }
            x(k, j) = s / diag;
        }
    }
    return x;
}

}  // namespace

ClusterResult eig_clusters(const CMatrix& a, double cluster_tol) {
    if (a.rows() != a.cols()) {
        throw ShapeError("eig_clusters: expected square matrix, got " + shape_str(a));
    }
    if (cluster_tol <= 0) throw ContractError("eig_clusters: cluster_tol must be positive");
    const Index n = a.rows();
    ClusterResult result;
    if (n == 0) return result;

    SchurResult s = schur(a);
    const double merge_dist = cluster_tol * scale_of(a);

    // Transitive merge of eigenvalues within merge_dist (union-find).
    std::vector<Index> parent(static_cast<size_t>(n));
    std::iota(parent.begin(), parent.end(), Index(0));
    auto find = [&](Index i) {
        while (parent[static_cast<size_t>(i)] != i) {
            parent[static_cast<size_t>(i)] =
                parent[static_cast<size_t>(parent[static_cast<size_t>(i)])];
            i = parent[static_cast<size_t>(i)];
        }
        return i;
    };
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (std::abs(s.t(i, i) - s.t(j, j)) <= merge_dist) {
                parent[static_cast<size_t>(find(i))] = find(j);
            }
        }
    }
    std::vector<Index> roots;
    for (Index i = 0; i < n; ++i) {
        if (find(i) == i) roots.push_back(i);
    }

    // Near-tolerance gaps between distinct clusters get a warning flag.
    for (Index i = 0; i < n && !result.gap_warning; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (find(i) == find(j)) continue;
            const double gap = std::abs(s.t(i, i) - s.t(j, j));
            if (gap < 10.0 * merge_dist) {
                result.gap_warning = true;
                break;
            }
        }
    }

    for (Index root : roots) {
        // Fresh reordering per cluster keeps each projector independent of the others.
        CMatrix t = s.t;
        CMatrix q = s.q;
        std::vector<char> select(static_cast<size_t>(n), 0);
        SpectralCluster cluster;
        for (Index i = 0; i < n; ++i) {
            if (find(i) == root) {
                select[static_cast<size_t>(i)] = 1;
                cluster.eigenvalues.push_back(s.t(i, i));
            }
        }
        const Index m = reorder_schur(t, q, select);
        cluster.alg_mult = m;
        Complex sum(0, 0);
        for (const Complex& ev : cluster.eigenvalues) sum += ev;
        cluster.center = sum / static_cast<double>(m);

        cluster.basis = q.leftCols(m);
        if (m == n) {
            cluster.projector = CMatrix::Identity(n, n);
        } else {
            // t = [[t11, t12], [0, t22]]; with t11 y - y t22 = t12 the spectral
            // projector in the Schur basis is [[I, y], [0, 0]].
            const CMatrix t11 = t.topLeftCorner(m, m);
            const CMatrix t22 = t.bottomRightCorner(n - m, n - m);
            const CMatrix t12 = t.topRightCorner(m, n - m);
            const CMatrix y = sylvester_triangular(t11, t22, t12);
            CMatrix pt = CMatrix::Zero(n, n);
            pt.topLeftCorner(m, m) = CMatrix::Identity(m, m);
            pt.topRightCorner(m, n - m) = y;
            cluster.projector = q * pt * q.adjoint();
        }
        result.clusters.push_back(std::move(cluster));
    }

    std::sort(result.clusters.begin(), result.clusters.end(),
              [](const SpectralCluster& x, const SpectralCluster& y) {
                  const double ax = std::abs(x.center), ay = std::abs(y.center);
                  if (ax != ay) return ax < ay;
                  if (x.center.real() != y.center.real()) return x.center.real() < y.center.real();
                  return x.center.imag() < y.center.imag();
              });
    return result;
}

RankBasis rank_basis(const CMatrix& a, double rank_tol, double scale_floor) {
    if (rank_tol <= 0) throw ContractError("rank_basis: rank_tol must be positive");
    ensure_finite(a, "rank_basis");
    RankBasis rb;
    const Index rows = a.rows(), cols = a.cols();
    if (rows == 0 || cols == 0) {
        rb.rank = 0;
        rb.col_basis = CMatrix(rows, 0);
        rb.null_basis = CMatrix::Identity(cols, cols);
        rb.row_basis = CMatrix(cols, 0);
        return rb;
    }
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = std::max(sv.size() > 0 ? sv(0) : 0.0, scale_floor);
    const double cut = rank_tol * smax;
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (smax > 0.0 && sv(i) > cut) ++r;
        if (smax > 0.0 && sv(i) > 0.1 * cut && sv(i) <= 10.0 * cut) rb.ambiguous = true;
    }
    rb.rank = r;
    rb.col_basis = svd.matrixU().leftCols(r);
    rb.row_basis = svd.matrixV().leftCols(r);
    rb.null_basis = svd.matrixV().rightCols(cols - r);
    return rb;
}

Complex det(const CMatrix& a) {
    if (a.rows() != a.cols()) {
        throw ShapeError("det: expected square matrix, got " + shape_str(a));
    }
    if (a.rows() == 0) return Complex(1, 0);
    ensure_finite(a, "det");
    return a.partialPivLu().determinant();
}

CMatrix solve(const CMatrix& a, const CMatrix& b, double rank_tol) {
    if (a.rows() != a.cols()) {
        throw ShapeError("solve: expected square matrix, got " + shape_str(a));
    }
    if (a.rows() != b.rows()) {
        throw ShapeError("solve: incompatible right-hand side " + shape_str(b));
    }
    if (a.rows() == 0) return CMatrix(0, b.cols());
    ensure_finite(a, "solve");
    Eigen::FullPivLU<CMatrix> lu(a);
    lu.setThreshold(rank_tol);
    if (!lu.isInvertible()) {
        Eigen::JacobiSVD<CMatrix> svd(a);
        const auto& sv = svd.singularValues();
        const double smin = sv(sv.size() - 1), smax = sv(0);
        std::ostringstream os;
        os << "solve: matrix singular to rank_tol " << rank_tol << " (condition estimate ";
        if (smin > 0) {
            os << smax / smin;
        } else {
            os << "inf";
        }
        os << ")";
        throw SingularError(os.str());
    }
    return lu.solve(b);
}

CMatrix solve_ls(const CMatrix& a, const CMatrix& b, double* residual) {
    if (a.rows() != b.rows()) {
        throw ShapeError("solve_ls: incompatible shapes " + shape_str(a) + " vs " + shape_str(b));
    }
    if (a.cols() == 0) {
        if (residual) *residual = b.norm();
        return CMatrix(0, b.cols());
    }
    CMatrix x = a.colPivHouseholderQr().solve(b);
    if (residual) *residual = (a * x - b).norm();
    return x;
}

CMatrix sylvester(const CMatrix& a, const CMatrix& b, const CMatrix& c) {
    if (a.rows() != a.cols() || b.rows() != b.cols()) {
        throw ShapeError("sylvester: A and B must be square");
    }
    if (c.rows() != a.rows() || c.cols() != b.rows()) {
        throw ShapeError("sylvester: C must be " + std::to_string(a.rows()) + "x" +
                         std::to_string(b.rows()));
    }
    SchurResult sa = schur(a);
    SchurResult sb = schur(b);
    const double sep_tol =
        1e-12 * std::max(scale_of(a), scale_of(b));
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.rows(); ++j) {
            if (std::abs(sa.t(i, i) - sb.t(j, j)) <= sep_tol) {
                throw SpectraOverlapError("sylvester: spectra of A and B overlap near eigenvalue");
            }
        }
    }
    const CMatrix ct = sa.q.adjoint() * c * sb.q;
    const CMatrix y = sylvester_triangular(sa.t, sb.t, ct);
    return sa.q * y * sb.q.adjoint();
}

}  // namespace cmt
