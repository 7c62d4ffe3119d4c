#pragma once

// Adaptive integration over patch regions cut out by sublevel sets or bands
// of a smooth region function, level-curve line integrals (k = 2), and a
// composite Gauss rule for one-dimensional radial integrals.

#include <cstddef>
#include <functional>
#include <optional>

#include "mobius_mono/surfaces.hpp"

namespace mobius_mono {

struct RegionSpec {
  enum class Kind { Whole, Sublevel, Band };

  Kind kind = Kind::Whole;
  std::function<double(const VecN&)> region_fn;
  double s_lo = 0.0;
  double s_hi = 0.0;

  static RegionSpec whole();
  /// { region_fn < s }, s > 0
  static RegionSpec sublevel(std::function<double(const VecN&)> fn, double s);
  /// { s_lo <= region_fn < s_hi }
  static RegionSpec band(std::function<double(const VecN&)> fn, double s_lo, double s_hi);

  bool contains_value(double g) const;
};

/// A scalar field on R^n with an optional closed-form gradient.
struct ScalarField {
  std::function<double(const VecN&)> value;
  std::function<VecN(const VecN&)> gradient;
};

struct QuadratureOptions {
  double tol = 1e-7;
  int max_depth = 14;
  int gauss_points = 4;
  /// Cells above this depth are always subdivided before acceptance.
  int min_depth = 3;
  /// Parameter point of a known integrand singularity; cells within
  /// `singular_radius` of it are refined to max_depth.
  std::optional<ParamVec> singular_param;
  double singular_radius = 1e-4;
  /// 0 selects MOBIUS_MONO_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t cells_used = 0;
  bool depth_hit = false;
  /// False when depth_hit and error_estimate > tol.
  bool tol_met = true;
};

using Integrand = std::function<double(const SurfaceSample&)>;

/// Integral of `integrand` d(area) over the part of the patch whose image
/// lies in `region`. Throws NonFiniteIntegrand with the offending parameter.
QuadratureResult integrate_region(const ParametricPatch& patch, const Integrand& integrand,
                                  const RegionSpec& region, const QuadratureOptions& options = {});

/// Line integral over { f o eval = level } with respect to image arc length.
/// Only for k = 2. Throws NonRegularLevel where |grad^Sigma f| <= 1e-8 or the
/// contour cannot be resolved as a graph at max_depth.
QuadratureResult level_curve_integral(const ParametricPatch& patch, const ScalarField& f,
                                      double level, const Integrand& integrand,
                                      const QuadratureOptions& options = {});

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

struct RadialResult {
  double value = 0.0;
  /// |Q(2p) - Q(p)| for the final panel count p.
  double error_estimate = 0.0;
  /// Quadrature-weighted sum of the inner error estimates.
  double inner_error = 0.0;
  int panels = 0;
  bool tol_met = true;
};

/// Composite Gauss-Legendre rule with `nodes` points per panel; the panel
/// count doubles until successive values agree to `tol`.
RadialResult radial_integral(const std::function<Estimate(double)>& inner, double lo, double hi,
                             int nodes = 4, double tol = 1e-10, int max_panels = 256);
RadialResult radial_integral(const std::function<double(double)>& inner, double lo, double hi,
                             int nodes = 4, double tol = 1e-10, int max_panels = 256);

struct GaussRule {
  std::vector<double> nodes;  // on [-1, 1]
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int points);

/// Worker count from MOBIUS_MONO_THREADS, else the hardware concurrency.
unsigned default_worker_count();

}  // namespace mobius_mono
