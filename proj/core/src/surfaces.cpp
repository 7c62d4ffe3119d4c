#include "mobius_mono/surfaces.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>

namespace mobius_mono {

namespace {

constexpr double kPi = std::numbers::pi;

ParamBox box2(double u0, double u1, double v0, double v1) {
  ParamVec lo(2);
  ParamVec hi(2);
  lo << u0, v0;
  hi << u1, v1;
  return {lo, hi};
}

VecN vec3(double x, double y, double z) {
  VecN v(3);
  v << x, y, z;
  return v;
}

// Points of an m^k grid strictly inside the box (cell centers).
std::vector<ParamVec> interior_grid(const ParamBox& box, int m, double margin) {
  const int k = box.dim();
  std::vector<ParamVec> pts;
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    ParamVec u(k);
    for (int d = 0; d < k; ++d) {
      const double lo = box.lo(d) + margin;
      const double hi = box.hi(d) - margin;
      u(d) = lo + (hi - lo) * (idx[static_cast<std::size_t>(d)] + 0.5) / m;
    }
    pts.push_back(u);
    int d = 0;
    while (d < k && ++idx[static_cast<std::size_t>(d)] == m) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == k) break;
  }
  return pts;
}

}  // namespace

bool ParamBox::contains(const ParamVec& u, double margin) const {
  if (u.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) < lo(i) + margin || u(i) > hi(i) - margin) return false;
  }
  return true;
}

ParametricPatch::ParametricPatch(std::string name, int ambient_dim, ParamBox domain, EvalFn eval,
                                 JacobianFn jacobian, std::vector<bool> periodic)
    : name_(std::move(name)),
      n_(ambient_dim),
      domain_(std::move(domain)),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      periodic_(std::move(periodic)),
      fd_step_(0.0) {
  const int k = domain_.dim();
  if (n_ < 2 || n_ > kMaxDim || k < 1 || k > n_ || domain_.hi.size() != k) {
    throw Error(ErrorCode::InvalidParameter, name_ + ": need 1 <= k <= n <= " + std::to_string(kMaxDim));
  }
  if (!((domain_.hi - domain_.lo).minCoeff() > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, name_ + ": empty parameter domain");
  }
  if (!eval_) throw Error(ErrorCode::InvalidParameter, name_ + ": missing evaluator");
  if (periodic_.empty()) periodic_.assign(static_cast<std::size_t>(k), false);
  if (static_cast<int>(periodic_.size()) != k) {
    throw Error(ErrorCode::InvalidParameter, name_ + ": periodic flags must have length k");
  }
  fd_step_ = 1e-5 * domain_.max_extent();

  // Spot-check full rank on a grid.
  const int m = k <= 2 ? 5 : 3;
  for (const auto& u : interior_grid(domain_, m, 0.0)) {
    const VecN x = eval_(u);
    if (x.size() != n_ || !x.allFinite()) {
      throw Error(ErrorCode::InvalidParameter, name_ + ": evaluator is not finite on the domain");
    }
    if (!(smallest_singular_value(this->jacobian(u)) > 1e-8)) {
      throw Error(ErrorCode::InvalidParameter, name_ + ": Jacobian loses rank on the domain");
    }
  }
}

MatN ParametricPatch::jacobian(const ParamVec& u) const {
  if (jacobian_) return jacobian_(u);
  const int k = this->k();
  MatN jac(n_, k);
  for (int i = 0; i < k; ++i) {
    ParamVec up = u;
    ParamVec um = u;
    up(i) += fd_step_;
    um(i) -= fd_step_;
    jac.col(i) = (eval_(up) - eval_(um)) / (2.0 * fd_step_);
  }
  return jac;
}

ParametricPatch ParametricPatch::with_domain(ParamBox domain) const {
  return ParametricPatch(name_, n_, std::move(domain), eval_, jacobian_, periodic_);
}

ParametricPatch ParametricPatch::transformed(const Isometry& iso) const {
  if (iso.dim() != n_) throw Error(ErrorCode::InvalidParameter, "transformed: dimension mismatch");
  auto eval = [f = eval_, iso](const ParamVec& u) { return iso.apply(f(u)); };
  JacobianFn jac;
  if (jacobian_) {
    jac = [j = jacobian_, iso](const ParamVec& u) -> MatN { return iso.linear() * j(u); };
  }
  return ParametricPatch(name_ + "'", n_, domain_, std::move(eval), std::move(jac), periodic_);
}

SurfaceSample sample(const ParametricPatch& patch, const ParamVec& u) {
  const double slack = -1e-9 * (1.0 + patch.domain().max_extent());
  if (!patch.domain().contains(u, slack)) throw Error(ErrorCode::OutsideDomain, "sample: parameter outside the patch domain");
  const MatN jac = patch.jacobian(u);
  Frame frame = orthonormal_frame(jac, 1e-12);
  const MatN gram = jac.transpose() * jac;
  const double det = gram.determinant();
  return {u, patch.eval(u), std::move(frame), std::sqrt(det)};
}

namespace {

VecN curvature_at_step(const ParametricPatch& patch, const ParamVec& u, double h,
                       const MatN& ginv, const Frame& frame) {
  const int k = patch.k();
  const VecN x0 = patch.eval(u);
  VecN trace = VecN::Zero(patch.n());
  auto shifted = [&](int i, double si, int j, double sj) {
    ParamVec p = u;
    p(i) += si;
    p(j) += sj;
    return patch.eval(p);
  };
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      VecN xij;
      if (i == j) {
        xij = (shifted(i, h, i, 0.0) - 2.0 * x0 + shifted(i, -h, i, 0.0)) / (h * h);
      } else {
        xij = (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h) +
               shifted(i, -h, j, -h)) /
              (4.0 * h * h);
      }
      const double weight = (i == j ? 1.0 : 2.0) * ginv(i, j);
      trace += weight * xij;
    }
  }
  return project(trace, frame).normal;
}

}  // namespace

double default_curvature_step(const ParametricPatch& patch) {
  return 1e-3 * patch.domain().max_extent();
}

VecN mean_curvature_vector(const ParametricPatch& patch, const ParamVec& u, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidParameter, "curvature step must be positive");
  if (!patch.domain().contains(u, 2.0 * h)) {
    throw Error(ErrorCode::InvalidParameter, "curvature evaluation needs a 2h interior margin");
  }
  const MatN jac = patch.jacobian(u);
  const Frame frame = orthonormal_frame(jac, 1e-12);
  const MatN ginv = (jac.transpose() * jac).inverse();
  const VecN coarse = curvature_at_step(patch, u, h, ginv, frame);
  const VecN fine = curvature_at_step(patch, u, 0.5 * h, ginv, frame);
  if ((coarse - fine).norm() > 1e-4) {
    throw Error(ErrorCode::StepTooLarge, "mean curvature changes by " +
                                             std::to_string((coarse - fine).norm()) +
                                             " between h and h/2");
  }
  return (4.0 * fine - coarse) / 3.0;
}

double mean_curvature_norm(const ParametricPatch& patch, const ParamVec& u, double h) {
  return mean_curvature_vector(patch, u, h).norm();
}

double max_mean_curvature(const ParametricPatch& patch, int grid) {
  const double h = default_curvature_step(patch);
  double worst = 0.0;
  for (const auto& u : interior_grid(patch.domain(), grid, 2.5 * h)) {
    worst = std::max(worst, mean_curvature_norm(patch, u, h));
  }
  return worst;
}

ParametricPatch flat_disk(const VecN& point, const Frame& frame, double extent) {
  require_ambient(point, "flat_disk point");
  if (frame.ambient_dim() != point.size()) {
    throw Error(ErrorCode::InvalidParameter, "flat_disk: frame and point dimensions differ");
  }
  if (!(extent > 0.0)) throw Error(ErrorCode::InvalidParameter, "flat_disk: extent must be positive");
  const int k = frame.dim();
  ParamBox box{ParamVec::Constant(k, -extent), ParamVec::Constant(k, extent)};
  const MatN e = frame.vectors();
  auto eval = [point, e](const ParamVec& u) -> VecN { return point + e * u; };
  auto jac = [e](const ParamVec&) -> MatN { return e; };
  return ParametricPatch("flat_disk", static_cast<int>(point.size()), std::move(box), eval, jac);
}

ParametricPatch catenoid(double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParameter, "catenoid: scale must be positive");
  const double c = scale;
  auto eval = [c](const ParamVec& p) {
    const double r = c * std::cosh(p(1) / c);
    return vec3(r * std::cos(p(0)), r * std::sin(p(0)), p(1));
  };
  auto jac = [c](const ParamVec& p) {
    const double r = c * std::cosh(p(1) / c);
    const double dr = std::sinh(p(1) / c);
    const double cu = std::cos(p(0));
    const double su = std::sin(p(0));
    MatN j(3, 2);
    j << -r * su, dr * cu,
          r * cu, dr * su,
          0.0,    1.0;
    return j;
  };
  return ParametricPatch("catenoid", 3, box2(-kPi, kPi, -1.0, 1.0), eval, jac, {true, false});
}

ParametricPatch helicoid(double pitch) {
  if (!(pitch != 0.0) || !std::isfinite(pitch)) {
    throw Error(ErrorCode::InvalidParameter, "helicoid: pitch must be nonzero");
  }
  auto eval = [pitch](const ParamVec& p) {
    return vec3(p(1) * std::cos(p(0)), p(1) * std::sin(p(0)), pitch * p(0));
  };
  auto jac = [pitch](const ParamVec& p) {
    const double cu = std::cos(p(0));
    const double su = std::sin(p(0));
    MatN j(3, 2);
    j << -p(1) * su, cu,
          p(1) * cu, su,
          pitch,     0.0;
    return j;
  };
  return ParametricPatch("helicoid", 3, box2(-kPi, kPi, -1.0, 1.0), eval, jac);
}

ParametricPatch enneper() {
  auto eval = [](const ParamVec& p) {
    const double u = p(0);
    const double v = p(1);
    return vec3(u - u * u * u / 3.0 + u * v * v, v - v * v * v / 3.0 + v * u * u, u * u - v * v);
  };
  auto jac = [](const ParamVec& p) {
    const double u = p(0);
    const double v = p(1);
    MatN j(3, 2);
    j << 1.0 - u * u + v * v, 2.0 * u * v,
         2.0 * u * v,         1.0 - v * v + u * u,
         2.0 * u,             -2.0 * v;
    return j;
  };
  return ParametricPatch("enneper", 3, box2(-1.0, 1.0, -1.0, 1.0), eval, jac);
}

ParametricPatch complex_parabola() {
  auto eval = [](const ParamVec& p) {
    VecN x(4);
    x << p(0), p(1), p(0) * p(0) - p(1) * p(1), 2.0 * p(0) * p(1);
    return x;
  };
  auto jac = [](const ParamVec& p) {
    MatN j(4, 2);
    j << 1.0, 0.0,
         0.0, 1.0,
         2.0 * p(0), -2.0 * p(1),
         2.0 * p(1), 2.0 * p(0);
    return j;
  };
  return ParametricPatch("complex_parabola", 4, box2(-1.0, 1.0, -1.0, 1.0), eval, jac);
}

ParametricPatch round_sphere(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParameter, "round_sphere: radius must be positive");
  auto eval = [radius](const ParamVec& p) {
    const double cv = std::cos(p(1));
    return vec3(radius * cv * std::cos(p(0)), radius * cv * std::sin(p(0)), radius * std::sin(p(1)));
  };
  auto jac = [radius](const ParamVec& p) {
    const double cu = std::cos(p(0));
    const double su = std::sin(p(0));
    const double cv = std::cos(p(1));
    const double sv = std::sin(p(1));
    MatN j(3, 2);
    j << -radius * cv * su, -radius * sv * cu,
          radius * cv * cu, -radius * sv * su,
          0.0,               radius * cv;
    return j;
  };
  return ParametricPatch("round_sphere", 3, box2(-kPi, kPi, -1.2, 1.2), eval, jac, {true, false});
}

}  // namespace mobius_mono
