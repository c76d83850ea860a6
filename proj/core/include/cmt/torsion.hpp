#pragma once

#include <array>
#include <optional>
#include <string>

#include "cmt/bicomplex.hpp"
#include "cmt/detline.hpp"

namespace cmt {

/// Declared reference bases for the (co)homology determinant lines: columns
/// are representative vectors in C whose classes form bases of H^k(d) and
/// H_k(d*).  Torsion coordinates are only comparable in a common choice.
struct CohBases {
    std::array<CMatrix, 2> coh;
    std::array<CMatrix, 2> hom;
    std::string coh_id = "auto";
    std::string hom_id = "auto";
};

/// Deterministic default: the orthogonal lifts of a split, id "auto"
/// (or "acyclic" when all cohomology vanishes).
CohBases default_bases(const SplitData& split);

struct TorsionValue {
    Complex coord{0, 0};
    std::string coh_basis_id;
    std::string hom_basis_id;
    std::optional<double> lambda_used;  // nullopt: definitional path
    double log_magnitude() const;
    double phase() const;
};

struct TorsionOptions {
    Tolerances tols;
    std::optional<CohBases> bases;
    // Coordinate of the auxiliary element c per parity, against the standard
    // basis wedge.  Torsion is independent of this choice (it cancels).
    std::array<Complex, 2> c_coords{Complex(1, 0), Complex(1, 0)};
};

/// Coordinate of phi(c) = h_even x h_odd^{-1} in Det(H^*(d)), against the
/// declared representative bases (defaults to the split's own lifts).
Complex phi(const BiComplex& c, const SplitData& split, const std::array<Complex, 2>& c_coords,
            const std::array<CMatrix, 2>* coh_reps = nullptr, double rank_tol = 1e-9);

/// Homological mirror of phi, for d*.
Complex phi_prime(const BiComplex& c, const SplitData& split,
                  const std::array<Complex, 2>& c_coords,
                  const std::array<CMatrix, 2>* hom_reps = nullptr, double rank_tol = 1e-9);

/// The sign exponent S(C): sum over parities of
/// dim B_{k-1} dim B^{k+1} + dim B^{k+1} dim H_k + dim B_{k-1} dim H^k, mod 2.
int sign_S(const SplitData& split);

/// The torsion (-1)^S phi(c) phi'(c)^{-1} computed through the canonical
/// maps on the whole complex.
TorsionValue torsion_definition(const BiComplex& c, const TorsionOptions& opts = {});

/// Acyclic product formula Det(d*d|C+^even) / Det(d*d|C+^odd); requires the
/// Laplacian to be invertible (throws NotAcyclicError otherwise).
Complex torsion_acyclic(const BiComplex& c, double rank_tol = 1e-9);

struct TruncatedTorsion {
    TorsionValue value;                // full torsion, tail factor included
    Complex tail_factor{1, 0};         // prod_k det(d*d | C+^k_(lambda,inf))^((-1)^k)
    std::array<Complex, 2> tail_dets;  // the two graded determinants separately
    std::array<CMatrix, 2> tail_ops;   // d*d restricted to C+^k_(lambda,inf)
    Complex low_coord{1, 0};           // [0,lambda] torsion, transported to the full bases
};

/// Spectral-cut assembly: tail graded determinant times the torsion of the
/// [0,lambda] subcomplex, with the truncated (co)homology identified to the
/// full one through the inclusion.  Independent of lambda.
TruncatedTorsion torsion_truncated(const BiComplex& c, double lambda,
                                   const TorsionOptions& opts = {});

/// Finite-dimensional log-determinant with Agmon angle theta in (0, 2pi):
/// sum of log(eigenvalue) over the nonzero spectrum (with algebraic
/// multiplicity), branch cut along the ray at angle theta.  exp of the
/// result is the product of the nonzero eigenvalues.
Complex agmon_log_det(const CMatrix& a, double theta, double rank_tol = 1e-9);

/// det of a transition matrix expressing the classes of `vectors` in the
/// classes of `reps`, both modulo the column span of `image_basis`.
Complex class_transition_det(const CMatrix& vectors, const CMatrix& reps,
                             const CMatrix& image_basis, double rank_tol = 1e-9);

}  // namespace cmt
