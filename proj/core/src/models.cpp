#include "cmt/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace cmt {

Index SeededRng::index(Index lo, Index hi) {
    if (hi < lo) throw ContractError("SeededRng::index: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<Index>(next_u64() % span);
}

Complex SeededRng::unit_complex() {
    const double phi = uniform(0.0, 2.0 * 3.14159265358979323846);
    return {std::cos(phi), std::sin(phi)};
}

CMatrix SeededRng::matrix(Index rows, Index cols) {
    CMatrix a(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            a(i, j) = Complex(uniform(-1.0, 1.0), uniform(-1.0, 1.0));
        }
    }
    return a;
}

CMatrix SeededRng::unitary(Index n) {
    if (n == 0) return CMatrix(0, 0);
    const CMatrix a = matrix(n, n);
    Eigen::HouseholderQR<CMatrix> qr(a);
    CMatrix q = qr.householderQ();
    // Fix the phase of each column so the result is a deterministic function
    // of the entries alone.
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

Eigen::MatrixXd SeededRng::sym_real(Index n, double amplitude) {
    Eigen::MatrixXd s(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            const double v = uniform(-amplitude, amplitude);
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// WedgeModel
// ---------------------------------------------------------------------------

WedgeModel::WedgeModel(int m_, Eigen::MatrixXd g, int orientation_)
    : m(m_), metric(std::move(g)), orientation(orientation_) {
    if (m < 0 || m > 20) throw ContractError("WedgeModel: m out of range");
    if (metric.rows() != m || metric.cols() != m) {
        throw MetricError("WedgeModel: metric must be m x m");
    }
    if ((metric - metric.transpose()).norm() > 1e-12 * std::max(1.0, metric.norm())) {
        throw MetricError("WedgeModel: metric must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(metric);
    if (es.eigenvalues().minCoeff() <= 0) {
        throw MetricError("WedgeModel: metric must be positive definite");
    }
    if (orientation != 1 && orientation != -1) {
        throw ContractError("WedgeModel: orientation must be +1 or -1");
    }
}

int WedgeModel::degree(std::uint32_t mask) { return std::popcount(mask); }

int WedgeModel::wedge_sign(std::uint32_t i_mask, std::uint32_t j_mask) {
    if ((i_mask & j_mask) != 0) return 0;
    // Count pairs (i in I, j in J) with i > j: transpositions to interleave.
    int inversions = 0;
    for (std::uint32_t j = j_mask; j != 0; j &= j - 1) {
        const int bit = std::countr_zero(j);
        inversions += std::popcount(i_mask >> (bit + 1));
    }
    return (inversions % 2 == 0) ? +1 : -1;
}

CMatrix WedgeModel::wedge_operator(const CVector& form) const {
    const Index n = full_dim();
    if (form.size() != n) throw ShapeError("wedge_operator: form has wrong length");
    CMatrix w = CMatrix::Zero(n, n);
    for (Index fi = 0; fi < n; ++fi) {
        const Complex coeff = form(fi);
        if (coeff == Complex(0, 0)) continue;
        const std::uint32_t i_mask = static_cast<std::uint32_t>(fi);
        for (Index j = 0; j < n; ++j) {
            const std::uint32_t j_mask = static_cast<std::uint32_t>(j);
            const int s = wedge_sign(i_mask, j_mask);
            if (s != 0) w(static_cast<Index>(i_mask | j_mask), j) += double(s) * coeff;
        }
    }
    return w;
}

CMatrix WedgeModel::star() const {
    const Index n = full_dim();
    const Eigen::MatrixXd ginv = metric.inverse();
    const double vol = orientation * std::sqrt(metric.determinant());
    const std::uint32_t top = static_cast<std::uint32_t>(n - 1);

    CMatrix st = CMatrix::Zero(n, n);
    std::vector<int> bits_i, bits_j;
    for (Index j = 0; j < n; ++j) {
        const std::uint32_t j_mask = static_cast<std::uint32_t>(j);
        const int q = degree(j_mask);
        bits_j.clear();
        for (std::uint32_t t = j_mask; t != 0; t &= t - 1) bits_j.push_back(std::countr_zero(t));
        for (Index i = 0; i < n; ++i) {
            const std::uint32_t i_mask = static_cast<std::uint32_t>(i);
            if (degree(i_mask) != q) continue;
            bits_i.clear();
            for (std::uint32_t t = i_mask; t != 0; t &= t - 1) bits_i.push_back(std::countr_zero(t));
            // <e^I, e^J> = det of the (I, J) minor of the inverse metric.
            Eigen::MatrixXd minor(q, q);
            for (int a = 0; a < q; ++a) {
                for (int b = 0; b < q; ++b) minor(a, b) = ginv(bits_i[a], bits_j[b]);
            }
            const double gram = (q == 0) ? 1.0 : minor.determinant();
            if (gram == 0.0) continue;
            const std::uint32_t comp = top & ~i_mask;
            st(static_cast<Index>(comp), j) += wedge_sign(i_mask, comp) * vol * gram;
        }
    }
    return st;
}

CMatrix WedgeModel::chirality() const {
    const Index n = full_dim();
    const int r = (m % 2 == 1) ? (m + 1) / 2 : m / 2;
    static const Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex ir = i_pow[r % 4];
    CMatrix g = star();
    for (Index j = 0; j < n; ++j) {
        const int q = degree(static_cast<std::uint32_t>(j));
        const int sgn = ((q * (q + 1) / 2) % 2 == 0) ? +1 : -1;
        g.col(j) *= ir * double(sgn);
    }
    return g;
}

std::vector<Index> WedgeModel::parity_indices(int parity) const {
    std::vector<Index> out;
    for (Index i = 0; i < full_dim(); ++i) {
        if (degree(static_cast<std::uint32_t>(i)) % 2 == parity) out.push_back(i);
    }
    return out;
}

BiComplex WedgeModel::collapse(const CMatrix& d_full, const CMatrix& ds_full) const {
    const std::vector<Index> even = parity_indices(0);
    const std::vector<Index> odd = parity_indices(1);
    auto take = [](const CMatrix& a, const std::vector<Index>& rows,
                   const std::vector<Index>& cols) {
        CMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
        for (size_t i = 0; i < rows.size(); ++i) {
            for (size_t j = 0; j < cols.size(); ++j) {
                out(static_cast<Index>(i), static_cast<Index>(j)) = a(rows[i], cols[j]);
            }
        }
        return out;
    };
    BiComplex c;
    c.n0 = static_cast<Index>(even.size());
    c.n1 = static_cast<Index>(odd.size());
    c.d_eo = take(d_full, odd, even);
    c.d_oe = take(d_full, even, odd);
    c.ds_eo = take(ds_full, odd, even);
    c.ds_oe = take(ds_full, even, odd);
    return c;
}

CVector WedgeModel::embed(int parity, const CVector& coords) const {
    const std::vector<Index> idx = parity_indices(parity);
    if (coords.size() != static_cast<Index>(idx.size())) {
        throw ShapeError("WedgeModel::embed: coordinate length mismatch");
    }
    CVector full = CVector::Zero(full_dim());
    for (size_t i = 0; i < idx.size(); ++i) full(idx[i]) = coords(static_cast<Index>(i));
    return full;
}

CMatrix WedgeModel::embed_cols(int parity, const CMatrix& cols) const {
    const std::vector<Index> idx = parity_indices(parity);
    if (cols.rows() != static_cast<Index>(idx.size())) {
        throw ShapeError("WedgeModel::embed_cols: row count mismatch");
    }
    CMatrix full = CMatrix::Zero(full_dim(), cols.cols());
    for (size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) = cols.row(static_cast<Index>(i));
    return full;
}

CMatrix WedgeModel::extract_cols(int parity, const CMatrix& full_cols) const {
    const std::vector<Index> idx = parity_indices(parity);
    if (full_cols.rows() != full_dim()) {
        throw ShapeError("WedgeModel::extract_cols: row count mismatch");
    }
    CMatrix out(static_cast<Index>(idx.size()), full_cols.cols());
    for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = full_cols.row(idx[i]);
    return out;
}

CMatrix chirality(int m, const Eigen::MatrixXd& g, int orientation) {
    return WedgeModel(m, g, orientation).chirality();
}

CVector make_form(int m, const std::vector<FormComponent>& components) {
    const Index n = Index(1) << m;
    CVector form = CVector::Zero(n);
    for (const FormComponent& comp : components) {
        if (comp.mask >= static_cast<std::uint32_t>(n)) {
            throw ShapeError("make_form: component index outside the model");
        }
        form(static_cast<Index>(comp.mask)) += comp.coeff;
    }
    return form;
}

// ---------------------------------------------------------------------------
// Torus model
// ---------------------------------------------------------------------------

TorusModel torus_model(int m, const Eigen::MatrixXd& g, const CVector& flux, int orientation) {
    WedgeModel wedge(m, g, orientation);
    if (flux.size() != wedge.full_dim()) throw ShapeError("torus_model: flux has wrong length");
    for (Index i = 0; i < flux.size(); ++i) {
        if (flux(i) == Complex(0, 0)) continue;
        const int q = WedgeModel::degree(static_cast<std::uint32_t>(i));
        if (q % 2 == 0 || q == 1) {
            std::ostringstream os;
            os << "torus_model: flux component of degree " << q
               << " (need odd degree >= 3; 1-form components belong in the connection)";
            throw FluxDegreeError(os.str());
        }
    }
    TorusModel t{std::move(wedge), flux, CMatrix(), BiComplex()};
    t.gamma_full = t.wedge.chirality();
    const CMatrix d_full = t.wedge.wedge_operator(flux);
    const CMatrix ds_full = t.gamma_full * d_full * t.gamma_full;
    t.complex = t.wedge.collapse(d_full, ds_full);
    return t;
}

// ---------------------------------------------------------------------------
// Flux twisting
// ---------------------------------------------------------------------------

FluxOperator wedge_flux(const WedgeModel& w, const CVector& form) {
    int min_deg = 0;
    for (Index i = 0; i < form.size(); ++i) {
        if (form(i) == Complex(0, 0)) continue;
        const int q = WedgeModel::degree(static_cast<std::uint32_t>(i));
        if (q % 2 == 0 || q == 1) {
            throw FluxDegreeError("wedge_flux: flux components must have odd degree >= 3");
        }
        min_deg = min_deg == 0 ? q : std::min(min_deg, q);
    }
    const CMatrix full = w.wedge_operator(form);
    const BiComplex blocks = w.collapse(full, CMatrix::Zero(full.rows(), full.cols()));
    FluxOperator h;
    h.h_eo = blocks.d_eo;
    h.h_oe = blocks.d_oe;
    h.degree = min_deg == 0 ? 3 : min_deg;
    h.source = "wedge";
    return h;
}

BiComplex flux_twist(const BiComplex& base, const FluxOperator& h, double tol) {
    if (h.h_eo.rows() != base.n1 || h.h_eo.cols() != base.n0 || h.h_oe.rows() != base.n0 ||
        h.h_oe.cols() != base.n1) {
        throw ShapeError("flux_twist: flux blocks do not match the complex");
    }
    const double h_scale = std::max(1.0, h.h_eo.norm() * h.h_oe.norm());
    if ((h.h_oe * h.h_eo).norm() > 1e-12 * h_scale || (h.h_eo * h.h_oe).norm() > 1e-12 * h_scale) {
        throw ClosednessError("flux_twist: flux does not square to zero");
    }
    const double cross_scale =
        std::max(1.0, std::max(base.d_eo.norm(), base.d_oe.norm()) *
                          std::max(h.h_eo.norm(), h.h_oe.norm()));
    const double anti_even = (base.d_oe * h.h_eo + h.h_oe * base.d_eo).norm();
    const double anti_odd = (base.d_eo * h.h_oe + h.h_eo * base.d_oe).norm();
    if (anti_even > tol * cross_scale || anti_odd > tol * cross_scale) {
        throw ClosednessError("flux_twist: flux is not closed against d (dh + hd != 0)");
    }
    BiComplex out = base;
    out.d_eo += h.h_eo;
    out.d_oe += h.h_oe;
    return out;
}

BiComplex collapse_z_graded(const std::vector<CMatrix>& d) {
    // d[p] maps C^p -> C^{p+1}; dims are read off the shapes.
    const size_t steps = d.size();
    std::vector<Index> dims(steps + 1, 0);
    for (size_t p = 0; p < steps; ++p) {
        dims[p] = d[p].cols();
        dims[p + 1] = d[p].rows();
        if (p > 0 && d[p].cols() != d[p - 1].rows()) {
            throw ShapeError("collapse_z_graded: inconsistent chain of shapes");
        }
    }
    std::vector<Index> offset_even(steps + 2, 0), offset_odd(steps + 2, 0);
    Index n0 = 0, n1 = 0;
    for (size_t p = 0; p <= steps; ++p) {
        if (p % 2 == 0) {
            offset_even[p] = n0;
            n0 += dims[p];
        } else {
            offset_odd[p] = n1;
            n1 += dims[p];
        }
    }
    BiComplex c = zero_bicomplex(n0, n1);
    for (size_t p = 0; p < steps; ++p) {
        if (dims[p] == 0 || dims[p + 1] == 0) continue;
        if (p % 2 == 0) {
            c.d_eo.block(offset_odd[p + 1], offset_even[p], dims[p + 1], dims[p]) = d[p];
        } else {
            c.d_oe.block(offset_even[p + 1], offset_odd[p], dims[p + 1], dims[p]) = d[p];
        }
    }
    return c;
}

CMatrix sharp_conjugate(const CMatrix& gamma, const CMatrix& d, double tol) {
    if (gamma.rows() != gamma.cols() || gamma.rows() != d.rows() || d.rows() != d.cols()) {
        throw ShapeError("sharp_conjugate: square operators of equal size required");
    }
    const Index n = gamma.rows();
    if ((gamma * gamma - CMatrix::Identity(n, n)).norm() > tol * scale_of(gamma)) {
        throw InvolutionError("sharp_conjugate: gamma is not an involution");
    }
    return gamma * d * gamma;
}

CMatrix eps_b(const WedgeModel& w, const CVector& b_form) {
    if (b_form.size() != w.full_dim()) throw ShapeError("eps_b: form has wrong length");
    for (Index i = 0; i < b_form.size(); ++i) {
        if (b_form(i) != Complex(0, 0) &&
            WedgeModel::degree(static_cast<std::uint32_t>(i)) % 2 == 1) {
            throw ParityError("eps_b: B must be an even form");
        }
    }
    const Index n = w.full_dim();
    const Complex b0 = b_form(0);
    CVector positive = b_form;
    positive(0) = Complex(0, 0);
    const CMatrix nilpotent = w.wedge_operator(positive);
    // Wedging by degree >= 2 pieces is nilpotent; the series is a finite sum.
    CMatrix sum = CMatrix::Identity(n, n);
    CMatrix power = CMatrix::Identity(n, n);
    for (int j = 1; j <= w.m / 2 + 1; ++j) {
        power = CMatrix(power * nilpotent) / double(j);
        if (power.norm() == 0.0) break;
        sum += power;
    }
    return std::exp(b0) * sum;
}

// ---------------------------------------------------------------------------
// Dolbeault wrapper
// ---------------------------------------------------------------------------

DolbeaultComplex dolbeault_wrap(int p, const CMatrix& dbar_eo, const CMatrix& dbar_oe,
                                const CMatrix& dbar_star_eo, const CMatrix& dbar_star_oe,
                                double validation_tol) {
    BiComplex c;
    c.n0 = dbar_eo.cols();
    c.n1 = dbar_eo.rows();
    if (dbar_oe.rows() != c.n0 || dbar_oe.cols() != c.n1 || dbar_star_eo.rows() != c.n1 ||
        dbar_star_eo.cols() != c.n0 || dbar_star_oe.rows() != c.n0 || dbar_star_oe.cols() != c.n1) {
        throw ShapeError("dolbeault_wrap: mismatched block shapes");
    }
    c.d_eo = dbar_eo;
    c.d_oe = dbar_oe;
    c.ds_eo = dbar_star_eo;
    c.ds_oe = dbar_star_oe;
    const ValidationReport report = validate(c, validation_tol);
    if (!report.pass) {
        throw ContractError("dolbeault_wrap: blocks fail the square-zero identities\n" +
                            report.to_string());
    }
    DolbeaultComplex out;
    out.p = p;
    out.complex = std::move(c);
    out.label = "dolbeault p=" + std::to_string(p);
    return out;
}

// ---------------------------------------------------------------------------
// Random complexes
// ---------------------------------------------------------------------------

SpectralProfile parse_profile(const std::string& name) {
    if (name == "unit" || name.empty()) return SpectralProfile::unit;
    if (name == "spread") return SpectralProfile::spread;
    if (name == "clustered") return SpectralProfile::clustered;
    throw ContractError("unknown spectral profile: " + name);
}

namespace {

Eigen::VectorXd profile_values(SpectralProfile profile, Index count, SeededRng& rng) {
    Eigen::VectorXd v(count);
    for (Index i = 0; i < count; ++i) {
        switch (profile) {
            case SpectralProfile::unit:
                v(i) = rng.uniform(0.5, 1.5);
                break;
            case SpectralProfile::spread:
                v(i) = std::pow(10.0, rng.uniform(-2.0, 2.0));
                break;
            case SpectralProfile::clustered:
                v(i) = (rng.uniform() < 0.5 ? 1.0 : 5.0) * (1.0 + 1e-9 * rng.uniform(-1.0, 1.0));
                break;
        }
    }
    return v;
}

// A pair of parity blocks with prescribed ranks forming a square-zero
// differential: built diagonal in canonical coordinates, then conjugated.
std::pair<CMatrix, CMatrix> random_square_zero(Index n0, Index n1, Index rank_eo, Index rank_oe,
                                               SpectralProfile profile, SeededRng& rng,
                                               const CMatrix& p0, const CMatrix& p1) {
    // Canonical layout: C^0 = [A_e | H_0 | B_0], C^1 = [A_o | H_1 | B_1],
    // with d_eo mapping A_e onto B_1 and d_oe mapping A_o onto B_0.
    CMatrix d_eo_c = CMatrix::Zero(n1, n0);
    CMatrix d_oe_c = CMatrix::Zero(n0, n1);
    const Eigen::VectorXd sv_e = profile_values(profile, rank_eo, rng);
    const Eigen::VectorXd sv_o = profile_values(profile, rank_oe, rng);
    for (Index i = 0; i < rank_eo; ++i) {
        d_eo_c(n1 - rank_eo + i, i) = sv_e(i) * rng.unit_complex();
    }
    for (Index i = 0; i < rank_oe; ++i) {
        d_oe_c(n0 - rank_oe + i, i) = sv_o(i) * rng.unit_complex();
    }
    return {p1 * d_eo_c * p0.adjoint(), p0 * d_oe_c * p1.adjoint()};
}

}  // namespace

BiComplex random_bicomplex(Index n0, Index n1, Index betti0, Index betti1,
                           SpectralProfile profile, std::uint64_t seed) {
    if (n0 < 0 || n1 < 0 || betti0 < 0 || betti1 < 0 || betti0 > n0 || betti1 > n1) {
        throw FeasibilityError("random_bicomplex: dimensions and betti numbers must be sane");
    }
    const Index total_rank = n0 - betti0;
    if (n1 - betti1 != total_rank) {
        throw FeasibilityError(
            "random_bicomplex: need n0 - betti0 == n1 - betti1 (rank balance)");
    }
    const Index max_rank = std::min(n0, n1);
    const Index lo = std::max<Index>(0, total_rank - max_rank);
    const Index hi = std::min(total_rank, max_rank);
    if (lo > hi) {
        throw FeasibilityError("random_bicomplex: no rank split fits the requested dims");
    }

    SeededRng rng(seed);
    for (int attempt = 0; attempt < 8; ++attempt) {
        const Index rank_eo = rng.index(lo, hi);
        const Index rank_oe = total_rank - rank_eo;
        const CMatrix p0 = rng.unitary(n0);
        const CMatrix p1 = rng.unitary(n1);
        const CMatrix q0 = rng.unitary(n0);
        const CMatrix q1 = rng.unitary(n1);

        BiComplex c;
        c.n0 = n0;
        c.n1 = n1;
        auto [d_eo, d_oe] = random_square_zero(n0, n1, rank_eo, rank_oe, profile, rng, p0, p1);
        c.d_eo = std::move(d_eo);
        c.d_oe = std::move(d_oe);
        // The d* side lowers parity, with independently drawn matrices but
        // ranks mirroring d (rank ds_eo = rank d_oe and vice versa): that is
        // what C^k = d*C^{k+1} (+) dC^{k-1} requires of an invertible
        // Laplacian, and it is the rank pattern of an adjoint.
        auto [ds_eo, ds_oe] = random_square_zero(n0, n1, rank_oe, rank_eo, profile, rng, q0, q1);
        c.ds_eo = std::move(ds_eo);
        c.ds_oe = std::move(ds_oe);

        const DiffSplit coh = cohomology(c);
        const DiffSplit hom = homology(c);
        if (coh.dim_h(0) == betti0 && coh.dim_h(1) == betti1 && hom.dim_h(0) == betti0 &&
            hom.dim_h(1) == betti1) {
            return c;
        }
    }
    throw DegeneracyError("random_bicomplex: could not realize the requested betti numbers");
}

BiComplex random_acyclic_bicomplex(Index n, SpectralProfile profile, std::uint64_t seed) {
    for (int attempt = 0; attempt < 16; ++attempt) {
        BiComplex c = random_bicomplex(n, n, 0, 0, profile, seed + 0x9e3779b97f4a7c15ull * attempt);
        auto [de, dod] = laplacian(c);
        const double scale = std::max(scale_of(de), scale_of(dod));
        double min_abs = std::numeric_limits<double>::infinity();
        for (const CMatrix* delta : {&de, &dod}) {
            for (const Complex& ev : eigenvalues(*delta)) min_abs = std::min(min_abs, std::abs(ev));
        }
        if (min_abs > 1e-8 * scale) return c;
    }
    throw DegeneracyError("random_acyclic_bicomplex: failed to find an invertible Laplacian");
}

}  // namespace cmt
