#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cmt {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Default tolerances, overridable through RunConfig / CLI flags.
struct Tolerances {
    double rank_tol = 1e-9;
    double cluster_tol = 1e-7;
    double validation_tol = 1e-10;
};

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpectraOverlapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CutCollisionError : std::runtime_error {
    CutCollisionError(const std::string& msg, Complex offender)
        : std::runtime_error(msg), offending_eigenvalue(offender) {}
    Complex offending_eigenvalue;
};
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotAcyclicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FluxDegreeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ClosednessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FeasibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RestrictionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StencilError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Factorizations and eigenstructure
// ---------------------------------------------------------------------------

struct SchurResult {
    CMatrix q;  // unitary
    CMatrix t;  // upper triangular, eigenvalues on the diagonal
};

/// Complex Schur decomposition A = Q T Q^H.
SchurResult schur(const CMatrix& a);

/// One generalized eigenspace of a (possibly non-normal) matrix.
struct SpectralCluster {
    Complex center;          // eigenvalue representative (multiplicity-weighted mean)
    Index alg_mult = 0;      // algebraic multiplicity
    CMatrix basis;           // n x alg_mult, columns span the generalized eigenspace
    CMatrix projector;       // n x n idempotent onto the subspace along the others
    std::vector<Complex> eigenvalues;  // members of the cluster, with multiplicity
};

struct ClusterResult {
    std::vector<SpectralCluster> clusters;
    bool gap_warning = false;  // some inter-cluster gap sits in (tol, 10*tol)
};

/// Groups the spectrum of `a` into clusters of nearby eigenvalues and returns
/// a basis and a spectral projector per cluster.  Eigenvalues closer than
/// cluster_tol * max(1, ||a||_F) are merged (transitively).  Projectors are
/// obtained from Schur reordering followed by a Sylvester block decoupling,
/// which stays valid for defective (Jordan) structure.
ClusterResult eig_clusters(const CMatrix& a, double cluster_tol = 1e-7);

/// All eigenvalues of `a`, with algebraic multiplicity, in Schur order.
std::vector<Complex> eigenvalues(const CMatrix& a);

// ---------------------------------------------------------------------------
// Rank decisions
// ---------------------------------------------------------------------------

struct RankBasis {
    Index rank = 0;
    CMatrix col_basis;   // orthonormal columns spanning the image
    CMatrix null_basis;  // orthonormal columns spanning the kernel
    CMatrix row_basis;   // orthonormal columns spanning the co-kernel complement (row space)
    bool ambiguous = false;  // some singular value within a decade of the cut
};

/// SVD-based rank decision: sigma_i <= rank_tol * sigma_max counts as zero.
/// `scale_floor`, when positive, bounds the reference scale from below:
/// the cut becomes rank_tol * max(sigma_max, scale_floor).  Use it when the
/// input may be a residual of an O(scale_floor) computation that should
/// count as zero.
RankBasis rank_basis(const CMatrix& a, double rank_tol = 1e-9, double scale_floor = 0.0);

// ---------------------------------------------------------------------------
// Determinants and solvers
// ---------------------------------------------------------------------------

/// Determinant via LU with partial pivoting.  det of a 0x0 matrix is 1.
Complex det(const CMatrix& a);

/// Solves A X = B for square nonsingular A; throws SingularError (with a
/// condition estimate in the message) when A is singular to rank_tol.
CMatrix solve(const CMatrix& a, const CMatrix& b, double rank_tol = 1e-9);

/// Least-squares solve of A X = B for (possibly rectangular) full column
/// rank A; `residual` (if given) receives ||A X - B||_F.
CMatrix solve_ls(const CMatrix& a, const CMatrix& b, double* residual = nullptr);

/// Solves the Sylvester equation A X - X B = C.  Requires spec(A) and
/// spec(B) disjoint; throws SpectraOverlapError otherwise.
CMatrix sylvester(const CMatrix& a, const CMatrix& b, const CMatrix& c);

// ---------------------------------------------------------------------------
// Small helpers shared across modules
// ---------------------------------------------------------------------------

/// Frobenius norm with a floor of 1, used to scale residual tolerances.
double scale_of(const CMatrix& a);

/// Throws ShapeError unless every entry of `a` is finite.
void ensure_finite(const CMatrix& a, const char* context);

}  // namespace cmt
