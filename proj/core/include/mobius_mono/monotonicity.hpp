#pragma once

// Moving-center monotonicity: the weight f whose sublevel sets are Moebius
// images of concentric balls, the quantities J, I, Q_A, Q_I, the increment
// identities and the pointwise machinery behind them.

#include <optional>
#include <string>
#include <vector>

#include "mobius_mono/mobius.hpp"
#include "mobius_mono/quadrature.hpp"
#include "mobius_mono/surfaces.hpp"

namespace mobius_mono {

/// |b|^2 |x - a|^2 / (2|b|^2 - R^2 - 2<b, x>), cross-checked against
/// R^2 |sigma(x)|^2 / (|b|^2 - |sigma(x)|^2). Throws OutsideHalfSpace.
double f_reflection(const VecN& x, const VecN& b, double R);

/// f_reflection(psi^{-1}(x)). Throws OutsideDomain unless |phi^{-1}(x)| < |b|.
double f_mobius(const VecN& x, const Decomposition& dec);

double s_of_r(double r, const VecN& b, double R);
double r_of_s(double s, const VecN& b, double R);

/// Closed-form tangential gradient of f_reflection at a surface sample.
VecN surface_gradient_f(const SurfaceSample& sample, const VecN& b, double R);

/// F(f) with F(t) = t^{-(k-2)/2} / (k-2) for k >= 3 and -log(t) / 2 for k = 2.
double W_potential(double t, int k);
/// W = f^{-k/2} (x - a) / k - F(f) b / |b|^2.
VecN W_field(const VecN& x, const VecN& b, double R, int k);

struct DivergenceCheck {
  double closed_form = 0.0;
  double fd_value = 0.0;
};

/// Closed-form div_Sigma W against a Richardson-extrapolated central
/// difference of W along the tangent frame. k is the sample's frame size.
DivergenceCheck div_W_check(const SurfaceSample& sample, const VecN& b, double R);

struct ScenarioOptions {
  double r_max = 0.0;
  /// Reject patches whose sampled |H| exceeds this (negative disables).
  double minimality_tol = 1e-6;
  int coverage_samples = 256;
};

/// A minimal patch together with the Moebius data (b, R, psi) defining f.
/// Reflection scenarios have psi = identity; the center point is c = psi(a)
/// and the direction d = psi(b) - psi(0).
class Scenario {
 public:
  static Scenario reflection(const VecN& b, double R, ParametricPatch patch,
                             const ScenarioOptions& options);
  static Scenario mobius(const MobiusMap& map, ParametricPatch patch,
                         const ScenarioOptions& options);

  const Decomposition& decomposition() const noexcept { return dec_; }
  const std::optional<MobiusMap>& map() const noexcept { return map_; }
  const ParametricPatch& patch() const noexcept { return patch_; }
  int k() const noexcept { return patch_.k(); }
  int n() const noexcept { return patch_.n(); }
  double r_max() const noexcept { return r_max_; }
  const VecN& b() const noexcept { return dec_.b; }
  double R() const noexcept { return dec_.R; }
  const VecN& center() const noexcept { return c_; }
  const VecN& direction() const noexcept { return dec_.direction; }
  const std::optional<ParamVec>& singular_param() const noexcept { return singular_param_; }

  double f(const VecN& x) const;
  /// f, or the largest double outside the domain of f (used for region tests).
  double region_f(const VecN& x) const;
  /// Ambient gradient of f.
  VecN grad_f(const VecN& x) const;
  /// Closed-form tangential gradient at a sample.
  VecN surface_grad_f(const SurfaceSample& s) const;
  /// |phi^{-1}(x)| evaluated through the reflection word.
  double preimage_radius(const VecN& x) const;

  QuadratureOptions quadrature_options(double tol, int max_depth) const;

 private:
  Scenario(Decomposition dec, std::optional<MobiusMap> map, ParametricPatch patch,
           const ScenarioOptions& options);

  Decomposition dec_;
  std::optional<MobiusMap> map_;
  std::optional<MobiusMap> inverse_map_;
  ParametricPatch patch_;
  double r_max_;
  VecN c_;
  std::optional<ParamVec> singular_param_;
};

struct QuadratureSettings {
  double tol = 1e-7;
  int max_depth = 14;
};

/// ((|b|^2 - r^2) / r^2)^{k/2} |Sigma cap phi(B_r)|, region from |phi^{-1}(x)| < r.
QuadratureResult J_of_r(const Scenario& scn, double r, const QuadratureSettings& q = {});
/// As J with integrand |(x - c)^T|^2 / |x - c|^2.
QuadratureResult I_of_r(const Scenario& scn, double r, const QuadratureSettings& q = {});
/// s^{-k/2} |Sigma cap E_s|, region from f < s.
QuadratureResult Q_A(const Scenario& scn, double s, const QuadratureSettings& q = {});
QuadratureResult Q_I(const Scenario& scn, double s, const QuadratureSettings& q = {});

struct IdentityResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double budget = 0.0;
  bool pass = false;
  bool tol_met = true;
};

/// budget = 3 * sum(error estimates) + 1e-12 |lhs|.
IdentityResidual make_residual(double lhs, double rhs, double error_sum, bool tol_met);

/// J(r_hi) - J(r_lo) against the band integral. Optional precomputed J values
/// avoid recomputation in sweeps.
IdentityResidual volume_identity_residual(const Scenario& scn, double r_lo, double r_hi,
                                          const QuadratureSettings& q = {},
                                          const QuadratureResult* J_lo = nullptr,
                                          const QuadratureResult* J_hi = nullptr);

IdentityResidual weighted_identity_residual(const Scenario& scn, double r_lo, double r_hi,
                                            const QuadratureSettings& q = {}, int rho_nodes = 4,
                                            const QuadratureResult* I_lo = nullptr,
                                            const QuadratureResult* I_hi = nullptr);

struct TwoSidedCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double budget = 0.0;
  bool pass = false;
};

/// Boundary flux of X_s = x - c - (s / |b|^2) d over {f = s} against
/// k |Sigma cap E_s| (k = 2).
TwoSidedCheck flux_identity_check(const Scenario& scn, double s, const QuadratureSettings& q = {});

/// Integral of |grad f| over {s <= f < t} against the integral over tau of
/// the lengths of {f = tau} (k = 2).
TwoSidedCheck coarea_check(const Scenario& scn, double s, double t,
                           const QuadratureSettings& q = {});

/// Largest relative deviation of <X_s, grad f> from
/// (2s / |x - c|^2)(|(x - c)^T|^2 - s^2 |d^T|^2 / |b|^4) over an m^k grid.
double level_pairing_max_error(const Scenario& scn, int grid = 12);

/// Finite-difference tangential gradient of f o eval at parameter u.
VecN surface_gradient_fd(const Scenario& scn, const ParamVec& u, double h);

struct GradientCheck {
  double max_rel_error = 0.0;
  int samples = 0;
};
GradientCheck gradient_check(const Scenario& scn, int grid = 8);

struct DivergenceSummary {
  double max_rel_error = 0.0;
  double max_abs_closed = 0.0;
  int samples = 0;
};
/// div W closed form vs FD at grid samples mapped into the reflection frame.
DivergenceSummary div_W_summary(const Scenario& scn, int grid = 8);

struct PrescribedPointResult {
  double area = 0.0;
  double area_error = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double budget = 0.0;
  bool pass = false;
};

/// |Sigma cap B_1| against |B^k_1| (1 - |a|^2)^{k/2} for a patch through a.
/// Throws PointNotOnSurface when the patch misses a by more than 1e-8.
PrescribedPointResult prescribed_point_bound(const ParametricPatch& patch, const VecN& a,
                                             const QuadratureSettings& q = {});

/// Closest parameter to x on the patch (grid search plus Gauss-Newton).
ParamVec closest_param(const ParametricPatch& patch, const VecN& x);

struct RadiusRow {
  double r = 0.0;
  double s = 0.0;
  QuadratureResult J;
  QuadratureResult I;
  QuadratureResult QA;
  QuadratureResult QI;
};

struct PairRow {
  double r_lo = 0.0;
  double r_hi = 0.0;
  IdentityResidual volume;
  IdentityResidual weighted;
  bool J_monotone = true;
  bool I_monotone = true;
};

struct EqualityDiagnostics {
  /// sup |(x - c)^perp| over samples inside phi(B_{r_max}).
  double normal_sup = 0.0;
  /// sup |d^T| over the same samples.
  double direction_sup = 0.0;
  /// True when every J and I increment is within its budget.
  bool constant = false;
};

struct MonotonicityReport {
  std::vector<RadiusRow> rows;
  std::vector<PairRow> pairs;
  EqualityDiagnostics equality;
  bool pass = false;
};

MonotonicityReport monotone_sweep(const Scenario& scn, const std::vector<double>& radii,
                                  const QuadratureSettings& q = {});

EqualityDiagnostics equality_diagnostics(const Scenario& scn, int grid = 24);

/// Volume of the unit k-ball, pi^{k/2} / Gamma(k/2 + 1).
double unit_ball_volume(int k);

}  // namespace mobius_mono
