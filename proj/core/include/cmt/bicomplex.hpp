#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cmt/numkit.hpp"

namespace cmt {

/// A Z2-graded bi-graded complex: one graded space C^even + C^odd carrying
/// two independent square-zero differentials d (parity-raising) and d*
/// (parity-lowering), each stored as its two parity blocks.
struct BiComplex {
    Index n0 = 0;   // dim C^even
    Index n1 = 0;   // dim C^odd
    CMatrix d_eo;   // d  : C^even -> C^odd   (n1 x n0)
    CMatrix d_oe;   // d  : C^odd  -> C^even  (n0 x n1)
    CMatrix ds_eo;  // d* : C^even -> C^odd   (n1 x n0)
    CMatrix ds_oe;  // d* : C^odd  -> C^even  (n0 x n1)

    Index dim(int parity) const { return parity == 0 ? n0 : n1; }
    /// Block of d mapping out of parity k.
    const CMatrix& d_outof(int k) const { return k == 0 ? d_eo : d_oe; }
    /// Block of d mapping into parity k.
    const CMatrix& d_into(int k) const { return k == 0 ? d_oe : d_eo; }
    const CMatrix& ds_outof(int k) const { return k == 0 ? ds_eo : ds_oe; }
    const CMatrix& ds_into(int k) const { return k == 0 ? ds_oe : ds_eo; }
};

/// Zero complex of the given dimensions.
BiComplex zero_bicomplex(Index n0, Index n1);

/// Direct sum, blocks block-diagonal, bases concatenated (first a, then b).
BiComplex block_sum(const BiComplex& a, const BiComplex& b);

struct ValidationReport {
    double res_dd_even = 0;    // ||d_oe d_eo||
    double res_dd_odd = 0;     // ||d_eo d_oe||
    double res_dsds_even = 0;  // ||ds_oe ds_eo||
    double res_dsds_odd = 0;   // ||ds_eo ds_oe||
    double tol = 0;            // applied threshold (absolute, scale included)
    bool shapes_ok = true;
    bool pass = false;
    std::string to_string() const;
};

/// Checks the four square-zero identities; never throws on math failure.
ValidationReport validate(const BiComplex& c, double validation_tol = 1e-10);

/// Combinatorial Laplacian d*d + dd* per parity: (even, odd).
std::pair<CMatrix, CMatrix> laplacian(const BiComplex& c);

/// Direct sum decomposition C^k = B^k + H^k + A^k adapted to one
/// differential: B = image, B+H = kernel, A = a complement mapped
/// bijectively onto the next image.  Complements are chosen orthogonal.
struct DiffSplit {
    std::array<CMatrix, 2> b;  // image basis per parity
    std::array<CMatrix, 2> h;  // (co)homology lift basis per parity
    std::array<CMatrix, 2> a;  // complement basis per parity
    bool rank_warning = false;
    Index dim_b(int k) const { return b[static_cast<size_t>(k)].cols(); }
    Index dim_h(int k) const { return h[static_cast<size_t>(k)].cols(); }
    Index dim_a(int k) const { return a[static_cast<size_t>(k)].cols(); }
};

/// Adapted split for d (cohomology side).  `scale_floor` bounds the rank
/// scale from below; pass the ambient operator norm when the complex is a
/// restriction whose blocks may be zero up to projection noise.
DiffSplit cohomology(const BiComplex& c, double rank_tol = 1e-9, double scale_floor = 0.0);
/// Adapted split for d* (homology side).
DiffSplit homology(const BiComplex& c, double rank_tol = 1e-9, double scale_floor = 0.0);

struct SplitData {
    DiffSplit coh;  // for d
    DiffSplit hom;  // for d*
};
SplitData make_split(const BiComplex& c, double rank_tol = 1e-9, double scale_floor = 0.0);

/// Spectral truncation data at a cut lambda: generalized eigenspaces of the
/// Laplacian with |eigenvalue| <= lambda vs > lambda, per parity.
struct SpectralSplit {
    double lambda_cut = 0;
    std::array<CMatrix, 2> proj_low, proj_high;
    std::array<CMatrix, 2> basis_low, basis_high;
    std::array<std::vector<Complex>, 2> eigenvalues;  // of the Laplacian, with multiplicity
    double commute_residual = 0;  // max over {d, d*} x {parities} of ||P D - D P||
    bool gap_warning = false;
};

/// Splits the complex at |eigenvalue| = lambda.  Throws CutCollisionError
/// when lambda sits within cluster_tol * scale of the spectrum.
SpectralSplit spectral_truncate(const BiComplex& c, double lambda,
                                double cluster_tol = 1e-7, double rank_tol = 1e-9);

/// Ker d* and Ker d inside the (lambda, infinity) part of parity k; the two
/// summands recover the whole tail.  Throws DegeneracyError when the direct
/// sum check fails (tolerance breakdown).
std::pair<CMatrix, CMatrix> plus_minus_split(const BiComplex& c, const SpectralSplit& s,
                                             int parity, double rank_tol = 1e-9);

/// The [0, lambda] subcomplex expressed in the coordinates of basis_low.
struct TruncatedComplex {
    BiComplex low;
    std::array<CMatrix, 2> basis;  // columns: embedding of low coordinates into C
};
TruncatedComplex truncated_complex(const BiComplex& c, const SpectralSplit& s);

}  // namespace cmt
