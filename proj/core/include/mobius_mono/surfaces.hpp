#pragma once

// Analytic k-dimensional immersed patches in R^n and the catalog of minimal
// submanifolds used as test subjects.

#include <functional>
#include <string>
#include <vector>

#include "mobius_mono/geom.hpp"

namespace mobius_mono {

/// Parameter points share the small-vector storage of ambient points.
using ParamVec = VecN;

struct ParamBox {
  ParamVec lo;
  ParamVec hi;

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  bool contains(const ParamVec& u, double margin = 0.0) const;
  double max_extent() const { return (hi - lo).maxCoeff(); }
  double volume() const { return (hi - lo).prod(); }
};

class ParametricPatch {
 public:
  using EvalFn = std::function<VecN(const ParamVec&)>;
  using JacobianFn = std::function<MatN(const ParamVec&)>;

  /// An empty `jacobian` selects central differences with step
  /// 1e-5 * max domain extent. `periodic[i]` marks parameter axes whose
  /// opposite faces are glued (seams rather than boundary).
  ParametricPatch(std::string name, int ambient_dim, ParamBox domain, EvalFn eval,
                  JacobianFn jacobian = {}, std::vector<bool> periodic = {});

  const std::string& name() const noexcept { return name_; }
  int k() const noexcept { return domain_.dim(); }
  int n() const noexcept { return n_; }
  const ParamBox& domain() const noexcept { return domain_; }
  bool periodic(int axis) const { return periodic_[static_cast<std::size_t>(axis)]; }
  bool has_analytic_jacobian() const noexcept { return static_cast<bool>(jacobian_); }

  VecN eval(const ParamVec& u) const { return eval_(u); }
  MatN jacobian(const ParamVec& u) const;

  ParametricPatch with_domain(ParamBox domain) const;
  /// The image patch iso(eval(u)) with the same parameterization.
  ParametricPatch transformed(const Isometry& iso) const;

 private:
  std::string name_;
  int n_;
  ParamBox domain_;
  EvalFn eval_;
  JacobianFn jacobian_;
  std::vector<bool> periodic_;
  double fd_step_;
};

struct SurfaceSample {
  ParamVec param;
  VecN position;
  Frame frame;
  double area_element;  // sqrt(det(J^T J))
};

SurfaceSample sample(const ParametricPatch& patch, const ParamVec& u);

/// Mean curvature vector (trace of the second fundamental form) from finite
/// differences at steps h and h/2, Richardson-extrapolated. Throws
/// StepTooLarge when the two step sizes disagree by more than 1e-4.
VecN mean_curvature_vector(const ParametricPatch& patch, const ParamVec& u, double h);
double mean_curvature_norm(const ParametricPatch& patch, const ParamVec& u, double h);
double default_curvature_step(const ParametricPatch& patch);

/// Max |H| over an m^k grid of interior parameters.
double max_mean_curvature(const ParametricPatch& patch, int grid = 10);

// Catalog. Each carries an analytic Jacobian.

/// point + sum_i u_i * frame_i on [-extent, extent]^k.
ParametricPatch flat_disk(const VecN& point, const Frame& frame, double extent);
/// (c cosh(v/c) cos u, c cosh(v/c) sin u, v), u in [-pi, pi] (periodic), v in [-1, 1].
ParametricPatch catenoid(double scale);
/// (v cos u, v sin u, pitch * u) on [-pi, pi] x [-1, 1].
ParametricPatch helicoid(double pitch);
/// (u - u^3/3 + u v^2, v - v^3/3 + v u^2, u^2 - v^2) on [-1, 1]^2.
ParametricPatch enneper();
/// (x, y, x^2 - y^2, 2 x y) in R^4 on [-1, 1]^2.
ParametricPatch complex_parabola();
/// Latitude-longitude patch of a round sphere; not minimal (|H| = 2 / radius).
ParametricPatch round_sphere(double radius);

}  // namespace mobius_mono
