#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cmt/bicomplex.hpp"

namespace cmt {

/// Deterministic random source.  std::mt19937_64 output is fully specified
/// by the standard; the value transforms below avoid the
/// implementation-defined distributions so that identical seeds give
/// identical streams everywhere.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t next_u64() { return gen_(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    Index index(Index lo, Index hi);  // uniform integer in [lo, hi]
    Complex unit_complex();           // uniform on the unit circle
    CMatrix matrix(Index rows, Index cols);  // entries uniform in the unit box
    CMatrix unitary(Index n);                // QR of a random matrix
    Eigen::MatrixXd sym_real(Index n, double amplitude);

private:
    std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Wedge model: the exterior algebra of C^m with a metric Hodge star
// ---------------------------------------------------------------------------

/// Exterior algebra on m generators.  Basis monomials are indexed by bit
/// masks in [0, 2^m); bit i set means the generator e^{i+1} is a factor.
/// Ordering is by increasing mask value.
struct WedgeModel {
    int m = 0;
    Eigen::MatrixXd metric;  // symmetric positive definite, m x m
    int orientation = +1;

    WedgeModel(int m_, Eigen::MatrixXd g, int orientation_ = +1);

    Index full_dim() const { return Index(1) << m; }
    static int degree(std::uint32_t mask);
    /// Sign of e^I wedge e^J for disjoint masks (0 when they intersect).
    static int wedge_sign(std::uint32_t i_mask, std::uint32_t j_mask);

    /// Matrix of (form wedge .) on the whole exterior algebra.
    CMatrix wedge_operator(const CVector& form) const;
    /// Metric Hodge star with orientation sign.
    CMatrix star() const;
    /// Chirality operator: i^r (-1)^{q(q+1)/2} star on degree q, normalized
    /// so that it squares to the identity.
    CMatrix chirality() const;

    std::vector<Index> parity_indices(int parity) const;
    /// Extracts the four parity blocks of parity-flipping full-space
    /// operators d and d* into a BiComplex.
    BiComplex collapse(const CMatrix& d_full, const CMatrix& ds_full) const;
    /// Embeds parity-block coordinates as a full-space vector and back.
    CVector embed(int parity, const CVector& coords) const;
    CMatrix embed_cols(int parity, const CMatrix& cols) const;
    CMatrix extract_cols(int parity, const CMatrix& full_cols) const;
};

/// Standalone chirality operator on the wedge model over (m, g).
CMatrix chirality(int m, const Eigen::MatrixXd& g, int orientation = +1);

/// A form given by sparse components: 1-based index digits packed in a mask.
struct FormComponent {
    std::uint32_t mask = 0;
    Complex coeff{0, 0};
};
CVector make_form(int m, const std::vector<FormComponent>& components);

// ---------------------------------------------------------------------------
// Torus model: translation-invariant forms, twisted by a constant flux
// ---------------------------------------------------------------------------

/// The twisted de Rham bi-complex on translation-invariant forms of an
/// m-torus: the untwisted differential vanishes, d is wedging by the flux,
/// d* is the chirality conjugate of d.
struct TorusModel {
    WedgeModel wedge;
    CVector flux;        // full-space coefficients of the flux form
    CMatrix gamma_full;  // chirality at the model's metric
    BiComplex complex;
};

/// Builds the torus model.  The flux must be a constant odd form of degree
/// >= 3 (a 1-form component belongs in the flat connection, not the flux).
TorusModel torus_model(int m, const Eigen::MatrixXd& g, const CVector& flux,
                       int orientation = +1);

// ---------------------------------------------------------------------------
// Flux twisting and conjugation
// ---------------------------------------------------------------------------

/// An odd parity-flipping operator with h^2 = 0, to be added to d.
struct FluxOperator {
    CMatrix h_eo;  // parity 0 -> 1 block
    CMatrix h_oe;  // parity 1 -> 0 block
    int degree = 3;
    std::string source = "user";
};

/// Flux operator of wedging by a constant odd form on the wedge model.
FluxOperator wedge_flux(const WedgeModel& w, const CVector& form);

/// Returns the complex with d replaced by d + h.  Requires h^2 = 0 and
/// d h + h d = 0 (flux closedness); throws ClosednessError otherwise.
/// The d* blocks are carried over unchanged.
BiComplex flux_twist(const BiComplex& base, const FluxOperator& h, double tol = 1e-11);

/// Collapses a Z-graded complex (d_p : C^p -> C^{p+1}) to its Z2 grading;
/// the d* blocks are zero.
BiComplex collapse_z_graded(const std::vector<CMatrix>& d);

/// Conjugation by an involution: gamma d gamma.  Throws InvolutionError
/// unless gamma^2 = 1 to tolerance.
CMatrix sharp_conjugate(const CMatrix& gamma, const CMatrix& d, double tol = 1e-10);

/// exp(B wedge .) for an even form B; an exact finite sum.  Intertwines
/// twisted differentials for closed B.  Throws ParityError on odd components.
CMatrix eps_b(const WedgeModel& w, const CVector& b_form);

// ---------------------------------------------------------------------------
// Dolbeault wrapper and random complexes
// ---------------------------------------------------------------------------

/// Abstract Dolbeault-type data: user-supplied twisted blocks at a fixed
/// holomorphic degree p, validated and labeled.
struct DolbeaultComplex {
    int p = 0;
    BiComplex complex;
    std::string label;
};
DolbeaultComplex dolbeault_wrap(int p, const CMatrix& dbar_eo, const CMatrix& dbar_oe,
                                const CMatrix& dbar_star_eo, const CMatrix& dbar_star_oe,
                                double validation_tol = 1e-10);

enum class SpectralProfile { unit, spread, clustered };
SpectralProfile parse_profile(const std::string& name);

/// Seeded random bi-complex with prescribed cohomology dimensions for d
/// (and the same target for the d* side, drawn independently).
/// Deterministic in the seed; throws FeasibilityError on impossible targets.
BiComplex random_bicomplex(Index n0, Index n1, Index betti0, Index betti1,
                           SpectralProfile profile, std::uint64_t seed);

/// Random complex with invertible Laplacian (retries draws deterministically).
BiComplex random_acyclic_bicomplex(Index n, SpectralProfile profile, std::uint64_t seed);

}  // namespace cmt
