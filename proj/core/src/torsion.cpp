#include "cmt/torsion.hpp"

#include <cmath>
#include <sstream>

namespace cmt {

namespace {

constexpr double kPi = 3.14159265358979323846;

CMatrix hcat(const CMatrix& x, const CMatrix& y) {
    CMatrix out(x.rows(), x.cols() + y.cols());
    out.leftCols(x.cols()) = x;
    out.rightCols(y.cols()) = y;
    return out;
}

// One parity of the phi computation: eta with c = eta * mu(d(x_prev) (x) h (x) x).
Complex phi_parity(const BiComplex& c, const DiffSplit& split, const CMatrix& d_outof_prev,
                   int k, Complex c_coord, const CMatrix* reps, double rank_tol) {
    const size_t uk = static_cast<size_t>(k);
    const size_t up = static_cast<size_t>(1 - k);
    const Index n = c.dim(k);
    const CMatrix image = d_outof_prev * split.a[up];  // basis of B^k as d-images of A^{k-1}
    const CMatrix& lift = split.h[uk];
    const CMatrix& compl_basis = split.a[uk];
    if (image.cols() + lift.cols() + compl_basis.cols() != n) {
        throw SplitError("phi: split does not fill the space at parity " + std::to_string(k));
    }
    Complex dm(1, 0);
    if (n > 0) {
        CMatrix m(n, n);
        m.leftCols(image.cols()) = image;
        m.middleCols(image.cols(), lift.cols()) = lift;
        m.rightCols(compl_basis.cols()) = compl_basis;
        dm = det(m);
    }
    if (!(std::abs(dm) > 0) || !std::isfinite(std::abs(dm))) {
        throw SplitError("phi: singular change-of-basis at parity " + std::to_string(k));
    }
    Complex eta = c_coord / dm;
    if (reps != nullptr && lift.cols() > 0) {
        eta *= class_transition_det(lift, *reps, split.b[uk], rank_tol);
    }
    return eta;
}

Complex phi_impl(const BiComplex& c, const DiffSplit& split, bool use_dstar,
                 const std::array<Complex, 2>& c_coords, const std::array<CMatrix, 2>* reps,
                 double rank_tol) {
    std::array<Complex, 2> eta;
    for (int k = 0; k < 2; ++k) {
        const CMatrix& d_prev = use_dstar ? c.ds_outof(1 - k) : c.d_outof(1 - k);
        eta[static_cast<size_t>(k)] =
            phi_parity(c, split, d_prev, k, c_coords[static_cast<size_t>(k)],
                       reps ? &(*reps)[static_cast<size_t>(k)] : nullptr, rank_tol);
    }
    return eta[0] / eta[1];
}

void check_torsion_value(const Complex& v, const char* what) {
    const double a = std::abs(v);
    if (!(a > 0) || !std::isfinite(a)) {
        throw DegeneracyError(std::string(what) + ": torsion coordinate vanished or overflowed");
    }
}

// d*d restricted to the column span of `basis`, as a matrix in that basis.
CMatrix restricted_dsd(const BiComplex& c, int parity, const CMatrix& basis) {
    if (basis.cols() == 0) return CMatrix(0, 0);
    const CMatrix dsd = parity == 0 ? CMatrix(c.ds_oe * c.d_eo) : CMatrix(c.ds_eo * c.d_oe);
    double residual = 0;
    CMatrix r = solve_ls(basis, dsd * basis, &residual);
    const double scale = std::max(1.0, dsd.norm());
    if (residual > 1e-6 * scale) {
        throw DegeneracyError("restricted determinant: subspace not d*d-invariant");
    }
    return r;
}

Complex restricted_dsd_det(const BiComplex& c, int parity, const CMatrix& basis) {
    return det(restricted_dsd(c, parity, basis));
}

}  // namespace

Complex class_transition_det(const CMatrix& vectors, const CMatrix& reps,
                             const CMatrix& image_basis, double rank_tol) {
    if (vectors.cols() != reps.cols()) {
        throw ShapeError("class_transition_det: class counts differ");
    }
    if (vectors.cols() == 0) return Complex(1, 0);
    const CMatrix stacked = hcat(reps, image_basis);
    double residual = 0;
    const CMatrix x = solve_ls(stacked, vectors, &residual);
    if (residual > 1e-7 * std::max(1.0, vectors.norm())) {
        throw ContractError(
            "class_transition_det: vectors do not lie in the declared classes modulo the image");
    }
    const Complex t = det(CMatrix(x.topRows(reps.cols())));
    if (!(std::abs(t) > rank_tol)) {
        throw SplitError("class_transition_det: declared basis classes are dependent");
    }
    return t;
}

CohBases default_bases(const SplitData& split) {
    CohBases b;
    b.coh = split.coh.h;
    b.hom = split.hom.h;
    const bool coh_zero = b.coh[0].cols() == 0 && b.coh[1].cols() == 0;
    const bool hom_zero = b.hom[0].cols() == 0 && b.hom[1].cols() == 0;
    b.coh_id = coh_zero ? "acyclic" : "auto";
    b.hom_id = hom_zero ? "acyclic" : "auto";
    return b;
}

double TorsionValue::log_magnitude() const { return std::log(std::abs(coord)); }
double TorsionValue::phase() const { return std::arg(coord); }

Complex phi(const BiComplex& c, const SplitData& split, const std::array<Complex, 2>& c_coords,
            const std::array<CMatrix, 2>* coh_reps, double rank_tol) {
    return phi_impl(c, split.coh, /*use_dstar=*/false, c_coords, coh_reps, rank_tol);
}

Complex phi_prime(const BiComplex& c, const SplitData& split,
                  const std::array<Complex, 2>& c_coords, const std::array<CMatrix, 2>* hom_reps,
                  double rank_tol) {
    return phi_impl(c, split.hom, /*use_dstar=*/true, c_coords, hom_reps, rank_tol);
}

int sign_S(const SplitData& split) {
    long s = 0;
    for (int k = 0; k < 2; ++k) {
        const int o = 1 - k;  // both k-1 and k+1 mod 2
        s += split.hom.dim_b(o) * split.coh.dim_b(o);
        s += split.coh.dim_b(o) * split.hom.dim_h(k);
        s += split.hom.dim_b(o) * split.coh.dim_h(k);
    }
    return static_cast<int>(s % 2);
}

TorsionValue torsion_definition(const BiComplex& c, const TorsionOptions& opts) {
    const SplitData split = make_split(c, opts.tols.rank_tol);
    const CohBases bases = opts.bases ? *opts.bases : default_bases(split);
    const Complex f = phi(c, split, opts.c_coords, &bases.coh, opts.tols.rank_tol);
    const Complex fp = phi_prime(c, split, opts.c_coords, &bases.hom, opts.tols.rank_tol);
    TorsionValue tv;
    tv.coord = (sign_S(split) ? -1.0 : 1.0) * f / fp;
    tv.coh_basis_id = bases.coh_id;
    tv.hom_basis_id = bases.hom_id;
    check_torsion_value(tv.coord, "torsion_definition");
    return tv;
}

Complex torsion_acyclic(const BiComplex& c, double rank_tol) {
    auto [delta_even, delta_odd] = laplacian(c);
    const double scale = std::max(scale_of(delta_even), scale_of(delta_odd));
    for (const CMatrix* delta : {&delta_even, &delta_odd}) {
        for (const Complex& ev : eigenvalues(*delta)) {
            if (std::abs(ev) <= rank_tol * scale) {
                throw NotAcyclicError("torsion_acyclic: Laplacian has (near-)zero eigenvalue");
            }
        }
    }
    std::array<Complex, 2> dets;
    for (int k = 0; k < 2; ++k) {
        // C+ = Ker d* on parity k; d*d restricts to it.
        const RankBasis rb = rank_basis(c.ds_outof(k), rank_tol);
        dets[static_cast<size_t>(k)] = restricted_dsd_det(c, k, rb.null_basis);
    }
    return dets[0] / dets[1];
}

TruncatedTorsion torsion_truncated(const BiComplex& c, double lambda, const TorsionOptions& opts) {
    const double rank_tol = opts.tols.rank_tol;
    const SpectralSplit s = spectral_truncate(c, lambda, opts.tols.cluster_tol, rank_tol);

    TruncatedTorsion out;
    for (int k = 0; k < 2; ++k) {
        auto [c_plus, c_minus] = plus_minus_split(c, s, k, rank_tol);
        (void)c_minus;
        out.tail_ops[static_cast<size_t>(k)] = restricted_dsd(c, k, c_plus);
        out.tail_dets[static_cast<size_t>(k)] = det(out.tail_ops[static_cast<size_t>(k)]);
    }
    out.tail_factor = out.tail_dets[0] / out.tail_dets[1];

    // Torsion of the [0,lambda] subcomplex, then transported to the declared
    // bases of the full complex through the inclusion-induced isomorphisms.
    // Rank decisions in the restricted complex are floored by the ambient
    // operator norms: a block that vanishes up to projection noise is zero.
    const TruncatedComplex tc = truncated_complex(c, s);
    const double ambient = std::max(std::max(c.d_eo.norm(), c.d_oe.norm()),
                                    std::max(c.ds_eo.norm(), c.ds_oe.norm()));
    const SplitData split_low = make_split(tc.low, rank_tol, ambient);
    const SplitData split_full = make_split(c, rank_tol);
    const CohBases bases = opts.bases ? *opts.bases : default_bases(split_full);

    const std::array<Complex, 2> unit = {Complex(1, 0), Complex(1, 0)};
    const Complex f_low = phi(tc.low, split_low, unit, nullptr, rank_tol);
    const Complex fp_low = phi_prime(tc.low, split_low, unit, nullptr, rank_tol);
    Complex low = (sign_S(split_low) ? -1.0 : 1.0) * f_low / fp_low;

    for (int k = 0; k < 2; ++k) {
        const size_t uk = static_cast<size_t>(k);
        // Cohomology side: low lifts, embedded in C, expressed in the declared classes.
        const CMatrix coh_vectors = tc.basis[uk] * split_low.coh.h[uk];
        if (coh_vectors.cols() != bases.coh[uk].cols()) {
            throw DegeneracyError("torsion_truncated: truncated cohomology rank differs from full");
        }
        if (coh_vectors.cols() > 0) {
            const Complex t =
                class_transition_det(coh_vectors, bases.coh[uk], split_full.coh.b[uk], rank_tol);
            low = (k == 0) ? low * t : low / t;
        }
        const CMatrix hom_vectors = tc.basis[uk] * split_low.hom.h[uk];
        if (hom_vectors.cols() != bases.hom[uk].cols()) {
            throw DegeneracyError("torsion_truncated: truncated homology rank differs from full");
        }
        if (hom_vectors.cols() > 0) {
            const Complex t =
                class_transition_det(hom_vectors, bases.hom[uk], split_full.hom.b[uk], rank_tol);
            low = (k == 0) ? low / t : low * t;
        }
    }
    out.low_coord = low;

    out.value.coord = out.tail_factor * low;
    out.value.coh_basis_id = bases.coh_id;
    out.value.hom_basis_id = bases.hom_id;
    out.value.lambda_used = lambda;
    check_torsion_value(out.value.coord, "torsion_truncated");
    return out;
}

Complex agmon_log_det(const CMatrix& a, double theta, double rank_tol) {
    if (!(theta > 0.0 && theta < 2.0 * kPi)) {
        throw ContractError("agmon_log_det: theta must lie in (0, 2pi)");
    }
    const std::vector<Complex> evs = eigenvalues(a);
    double max_abs = 0;
    for (const Complex& ev : evs) max_abs = std::max(max_abs, std::abs(ev));
    Complex sum(0, 0);
    if (max_abs == 0) return sum;
    const double zero_cut = rank_tol * max_abs;
    for (const Complex& ev : evs) {
        if (std::abs(ev) <= zero_cut) continue;
        const double arg0 = std::arg(ev);
        // Angular distance to the cut ray.
        double delta = std::fmod(arg0 - theta, 2.0 * kPi);
        if (delta < -kPi) delta += 2.0 * kPi;
        if (delta > kPi) delta -= 2.0 * kPi;
        if (std::abs(delta) < 1e-9) {
            std::ostringstream os;
            os << "agmon_log_det: eigenvalue on the cut ray at angle " << theta;
            throw CutCollisionError(os.str(), ev);
        }
        // Branch with argument in (theta - 2pi, theta).
        const double shifted = arg0 + 2.0 * kPi * std::floor((theta - arg0) / (2.0 * kPi));
        sum += Complex(std::log(std::abs(ev)), shifted);
    }
    return sum;
}

}  // namespace cmt
