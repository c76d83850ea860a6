#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cmt/models.hpp"
#include "cmt/torsion.hpp"

namespace cmt {

/// One-parameter families of bi-complexes with an explicit determinant-line
/// transport rule between parameters:
///  - metric_conjugation: d fixed, d*(u) = exp(-u a) d* exp(u a); cohomology
///    bases fixed, homology bases transported by exp(-u a);
///  - flux_conjugation: d(v) = exp(v b) d exp(-v b), d*(v) = exp(-v b) d*
///    exp(v b); cohomology bases transported by exp(v b), homology by
///    exp(-v b);
///  - torus_metric: d = flux wedge (fixed), d*(u) = Gamma(g(u)) d Gamma(g(u));
///    homology bases transported by Gamma(g(u)) Gamma(g(0)), which solves the
///    same transport equation with a(u) = Gamma(u) dGamma/du.
struct DeformFamily {
    enum class Kind { metric_conjugation, flux_conjugation, torus_metric };
    Kind kind = Kind::metric_conjugation;
    BiComplex base;
    CMatrix gen0, gen1;  // parity blocks of the fixed even generator (a or b)

    // torus_metric data
    int torus_m = 0;
    int torus_orientation = +1;
    CVector torus_flux;
    std::function<Eigen::MatrixXd(double)> metric_path;
    CMatrix gamma_base;  // chirality at the base metric

    BiComplex complex_at(double t) const;
    /// Parity blocks of the generator at parameter t (alpha_u for metric
    /// families, beta for flux families; finite-difference Gamma' for the
    /// torus law).
    std::pair<CMatrix, CMatrix> generator_at(double t) const;
    /// Declared bases at parameter t, transported from bases for the base
    /// complex at t = 0.
    CohBases bases_at(double t, const CohBases& base_bases) const;
    std::string transport_name() const;
};

DeformFamily metric_family(BiComplex base, CMatrix alpha0, CMatrix alpha1);
DeformFamily flux_family(BiComplex base, CMatrix beta0, CMatrix beta1);
DeformFamily torus_metric_family(int m, CVector flux,
                                 std::function<Eigen::MatrixXd(double)> metric_path,
                                 int orientation = +1);

/// Parity-alternating trace Tr(op|even) - Tr(op|odd).
Complex supertrace(const CMatrix& op0, const CMatrix& op1);

/// Supertrace of the compression onto the range of the projectors:
/// sum_k (-1)^k Tr(op_k proj_k).  When commute_tol > 0 the projectors must
/// commute with the operators to that tolerance (RestrictionError otherwise).
Complex supertrace(const CMatrix& op0, const CMatrix& op1, const CMatrix& proj0,
                   const CMatrix& proj1, double commute_tol = 0.0);

/// First-order rate of log tau_[0,lambda] predicted by the variation
/// lemmas: -(supertrace of the generator compressed to the [0,lambda]
/// part), doubled for the flux law because it conjugates both
/// differentials (each side contributes one supertrace).
Complex predicted_rate(const DeformFamily& f, double t0, double lambda,
                       const Tolerances& tols = {});

enum class RatePath { truncated_part, full_assembly };

/// Centered finite difference of log tau at t0 with the family's
/// determinant-line transport; phases are unwrapped across the stencil
/// (StencilError when the branch jump exceeds pi).
Complex fd_rate(const DeformFamily& f, double t0, double eps, double lambda, RatePath path,
                const CohBases& base_bases, const Tolerances& tols = {});

struct VariationPolicy {
    double mismatch_scale = 10.0;  // allowed |fd - predicted| <= scale * eps^2 * size
    std::optional<double> full_rate_bound;  // optional |fd_full| bound (constancy checks)
};

struct VariationRow {
    double t = 0;
    Complex predicted{0, 0};
    Complex fd_truncated{0, 0};
    Complex fd_full{0, 0};
    Complex local_residual{0, 0};  // fd_full - fd_truncated
    Complex tau_full{0, 0};        // full assembled torsion at t
    double abs_mismatch = 0;
    double rel_mismatch = 0;
    bool ok = false;
    std::string error;  // per-point failures are reported inline
};

struct VariationReport {
    std::vector<VariationRow> rows;
    double lambda = 0;
    double eps = 0;
    std::string transport;
    bool grid_advice = false;  // adjacent tau phases jumped by more than pi/2
    bool all_ok = false;
    std::string to_table() const;
};

VariationReport variation_report(const DeformFamily& f, const std::vector<double>& grid,
                                 double lambda, double eps, const CohBases& base_bases,
                                 const VariationPolicy& policy = {}, const Tolerances& tols = {},
                                 int threads = 1);

}  // namespace cmt
