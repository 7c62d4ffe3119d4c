#include "mobius_mono/monotonicity.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mobius_mono {

namespace {

VecN center_of(const VecN& b, double R) { return ((b.squaredNorm() - R * R) / b.squaredNorm()) * b; }

double half_space_gap(const VecN& x, const VecN& b, double R) {
  return 2.0 * b.squaredNorm() - R * R - 2.0 * b.dot(x);
}

void require_radius(double r, double b_norm, double r_max, const char* what) {
  if (!(r > 0.0) || r > r_max) {
    throw Error(ErrorCode::InvalidParameter,
                std::string(what) + ": radius " + std::to_string(r) + " outside (0, r_max = " +
                    std::to_string(r_max) + "]");
  }
  (void)b_norm;
}

// |(x - c)^T|^2 / |x - c|^2, taken as 0 at x = c.
double tangential_ratio(const SurfaceSample& s, const VecN& c) {
  const VecN u = s.position - c;
  const double u2 = u.squaredNorm();
  if (u2 == 0.0) return 0.0;
  return tangential_norm2(u, s.frame) / u2;
}

double normal_ratio(const SurfaceSample& s, const VecN& c) {
  const VecN u = s.position - c;
  const double u2 = u.squaredNorm();
  if (u2 == 0.0) return 0.0;
  return std::max(0.0, u2 - tangential_norm2(u, s.frame)) / u2;
}

QuadratureResult scaled(QuadratureResult r, double factor) {
  r.value *= factor;
  r.error_estimate *= factor;
  return r;
}

std::vector<ParamVec> interior_grid(const ParamBox& box, int m) {
  const int k = box.dim();
  int count = 1;
  for (int d = 0; d < k; ++d) count *= m;
  std::vector<ParamVec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int idx = 0; idx < count; ++idx) {
    ParamVec u(k);
    int rem = idx;
    for (int d = 0; d < k; ++d) {
      u(d) = box.lo(d) + (box.hi(d) - box.lo(d)) * ((rem % m) + 0.5) / m;
      rem /= m;
    }
    out.push_back(u);
  }
  return out;
}

// Points on the non-periodic faces of the parameter box.
std::vector<ParamVec> face_samples(const ParametricPatch& patch, int per_face) {
  const ParamBox& box = patch.domain();
  const int k = box.dim();
  std::vector<ParamVec> out;
  for (int axis = 0; axis < k; ++axis) {
    if (patch.periodic(axis)) continue;
    int side = 1;
    while (side < 64 && std::pow(side + 1, k - 1) <= per_face) ++side;
    int count = 1;
    for (int d = 0; d < k - 1; ++d) count *= side + 1;
    for (double face : {box.lo(axis), box.hi(axis)}) {
      for (int idx = 0; idx < count; ++idx) {
        ParamVec u(k);
        int rem = idx;
        for (int d = 0; d < k; ++d) {
          if (d == axis) {
            u(d) = face;
            continue;
          }
          u(d) = box.lo(d) + (box.hi(d) - box.lo(d)) * (rem % (side + 1)) / side;
          rem /= side + 1;
        }
        out.push_back(u);
      }
    }
  }
  return out;
}

}  // namespace

double f_reflection(const VecN& x, const VecN& b, double R) {
  const double b2 = b.squaredNorm();
  const double gap = half_space_gap(x, b, R);
  if (!(gap > 0.0)) {
    throw Error(ErrorCode::OutsideHalfSpace, "f: point outside the half-space 2|b|^2 - R^2 - 2<b,x> > 0");
  }
  const VecN a = center_of(b, R);
  const double closed = b2 * (x - a).squaredNorm() / gap;
  const double sig2 = reflect_finite(Sphere(b, R), x).squaredNorm();
  const double via_sigma = R * R * sig2 / (b2 - sig2);
  const double scale = std::max(std::abs(closed), 1e-6 * R * R / b2);
  if (std::abs(via_sigma - closed) > 1e-10 * scale) {
    throw Error(ErrorCode::ValidationFailed, "f: closed forms disagree (" + std::to_string(closed) +
                                                 " vs " + std::to_string(via_sigma) + ")");
  }
  return closed;
}

double f_mobius(const VecN& x, const Decomposition& dec) {
  const VecN y = dec.psi.apply_inverse(x);
  if (!(half_space_gap(y, dec.b, dec.R) > 0.0)) {
    throw Error(ErrorCode::OutsideDomain, "f: |phi^-1(x)| >= |b|");
  }
  return f_reflection(y, dec.b, dec.R);
}

double s_of_r(double r, const VecN& b, double R) {
  const double b2 = b.squaredNorm();
  if (!(r > 0.0) || !(r * r < b2)) {
    throw Error(ErrorCode::InvalidParameter, "s_of_r needs 0 < r < |b|");
  }
  return R * R * r * r / (b2 - r * r);
}

double r_of_s(double s, const VecN& b, double R) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidParameter, "r_of_s needs s > 0");
  return b.norm() * std::sqrt(s / (R * R + s));
}

VecN surface_gradient_f(const SurfaceSample& sample, const VecN& b, double R) {
  const double s = f_reflection(sample.position, b, R);
  const VecN u = sample.position - center_of(b, R);
  const double u2 = u.squaredNorm();
  if (u2 == 0.0) return VecN::Zero(u.size());
  const VecN g = (2.0 * s / u2) * (u + (s / b.squaredNorm()) * b);
  return project(g, sample.frame).tangential;
}

double W_potential(double t, int k) {
  if (k < 2) throw Error(ErrorCode::InvalidParameter, "W needs k >= 2");
  if (k == 2) return -0.5 * std::log(t);
  return std::pow(t, -0.5 * (k - 2)) / (k - 2);
}

VecN W_field(const VecN& x, const VecN& b, double R, int k) {
  const double f = f_reflection(x, b, R);
  return (std::pow(f, -0.5 * k) / k) * (x - center_of(b, R)) -
         (W_potential(f, k) / b.squaredNorm()) * b;
}

DivergenceCheck div_W_check(const SurfaceSample& sample, const VecN& b, double R) {
  const int k = sample.frame.dim();
  const VecN& x = sample.position;
  const VecN u = x - center_of(b, R);
  const double u2 = u.squaredNorm();
  if (u2 == 0.0) throw Error(ErrorCode::InvalidParameter, "div W: sample at the center point");
  const double f = f_reflection(x, b, R);
  const double b2 = b.squaredNorm();
  const double normal2 = std::max(0.0, u2 - tangential_norm2(u, sample.frame));
  const double bt2 = tangential_norm2(b, sample.frame);
  DivergenceCheck out;
  out.closed_form = std::pow(f, -0.5 * k) * normal2 / u2 +
                    std::pow(f, -0.5 * (k - 4)) * bt2 / (b2 * b2 * u2);

  const double h = 1e-3 * std::min(std::sqrt(u2), half_space_gap(x, b, R) / (2.0 * b.norm()));
  const auto fd = [&](double step) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const VecN e = sample.frame.vector(i);
      const VecN dw = (W_field(x + step * e, b, R, k) - W_field(x - step * e, b, R, k)) / (2.0 * step);
      sum += dw.dot(e);
    }
    return sum;
  };
  out.fd_value = (4.0 * fd(0.5 * h) - fd(h)) / 3.0;
  return out;
}

Scenario::Scenario(Decomposition dec, std::optional<MobiusMap> map, ParametricPatch patch,
                   const ScenarioOptions& options)
    : dec_(std::move(dec)),
      map_(std::move(map)),
      patch_(std::move(patch)),
      r_max_(options.r_max),
      c_(dec_.phi_of_origin()) {
  if (map_) inverse_map_ = inverse(*map_);
  if (patch_.n() != dec_.b.size()) {
    throw Error(ErrorCode::InvalidParameter, "scenario: patch and map dimensions differ");
  }
  const double b_norm = dec_.b.norm();
  if (!(r_max_ > 0.0) || r_max_ > 0.99 * b_norm) {
    throw Error(ErrorCode::InvalidParameter,
                "scenario: r_max = " + std::to_string(r_max_) +
                    " violates 0 < r_max <= 0.99|b| (|b| = " + std::to_string(b_norm) +
                    "); radii near |b| are degenerate");
  }
  if (options.minimality_tol >= 0.0) {
    const double h = max_mean_curvature(patch_);
    if (h > options.minimality_tol) {
      throw Error(ErrorCode::InvalidParameter,
                  "scenario: patch '" + patch_.name() + "' is not minimal (|H| = " + std::to_string(h) + ")");
    }
  }
  const int side = patch_.k() <= 2 ? 48 : 12;
  for (const auto& u : interior_grid(patch_.domain(), side)) {
    const VecN y = dec_.psi.apply_inverse(patch_.eval(u));
    if (!(half_space_gap(y, dec_.b, dec_.R) > 0.0)) {
      throw Error(ErrorCode::CoverageViolated, "scenario: patch leaves the domain of f");
    }
  }
  for (const auto& u : face_samples(patch_, options.coverage_samples)) {
    const double rho = preimage_radius(patch_.eval(u));
    if (!(rho > r_max_)) {
      throw Error(ErrorCode::CoverageViolated,
                  "scenario: patch boundary meets phi(B_r_max) (|phi^-1(x)| = " + std::to_string(rho) +
                      " <= r_max = " + std::to_string(r_max_) + ")");
    }
  }
  const ParamVec u = closest_param(patch_, c_);
  if ((patch_.eval(u) - c_).norm() <= 1e-8) singular_param_ = u;
}

Scenario Scenario::reflection(const VecN& b, double R, ParametricPatch patch,
                              const ScenarioOptions& options) {
  require_ambient(b, "b");
  if (b.norm() < 1e-12) throw Error(ErrorCode::OriginIsPole, "origin is the pole (b = 0)");
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidParameter, "R must be positive");
  Decomposition dec{b, R, Isometry::identity(static_cast<int>(b.size())), center_of(b, R), b};
  return Scenario(std::move(dec), std::nullopt, std::move(patch), options);
}

Scenario Scenario::mobius(const MobiusMap& map, ParametricPatch patch, const ScenarioOptions& options) {
  Decomposition dec = map.decomposition() ? *map.decomposition() : isometric_decomposition(map);
  return Scenario(std::move(dec), map, std::move(patch), options);
}

double Scenario::f(const VecN& x) const { return f_mobius(x, dec_); }

double Scenario::region_f(const VecN& x) const {
  const VecN y = dec_.psi.apply_inverse(x);
  const double gap = half_space_gap(y, dec_.b, dec_.R);
  if (!(gap > 0.0)) return std::numeric_limits<double>::max();
  return dec_.b.squaredNorm() * (y - dec_.a).squaredNorm() / gap;
}

VecN Scenario::grad_f(const VecN& x) const {
  const VecN y = dec_.psi.apply_inverse(x);
  const double f = f_reflection(y, dec_.b, dec_.R);
  const VecN u = y - dec_.a;
  const double u2 = u.squaredNorm();
  if (u2 == 0.0) return VecN::Zero(x.size());
  return dec_.psi.apply_linear((2.0 * f / u2) * (u + (f / dec_.b.squaredNorm()) * dec_.b));
}

VecN Scenario::surface_grad_f(const SurfaceSample& s) const {
  return project(grad_f(s.position), s.frame).tangential;
}

double Scenario::preimage_radius(const VecN& x) const {
  if (inverse_map_) {
    const ExtendedPoint y = apply(*inverse_map_, ExtendedPoint(x));
    return y.is_infinity() ? std::numeric_limits<double>::infinity() : y.point().norm();
  }
  if ((x - dec_.b).squaredNorm() == 0.0) return std::numeric_limits<double>::infinity();
  return reflect_finite(Sphere(dec_.b, dec_.R), x).norm();
}

QuadratureOptions Scenario::quadrature_options(double tol, int max_depth) const {
  QuadratureOptions o;
  o.tol = tol;
  o.max_depth = max_depth;
  o.singular_param = singular_param_;
  return o;
}

namespace {

double J_prefactor(const Scenario& scn, double r) {
  const double b2 = scn.b().squaredNorm();
  return std::pow((b2 - r * r) / (r * r), 0.5 * scn.k());
}

QuadratureResult ball_integral(const Scenario& scn, double r, const Integrand& g,
                               const QuadratureSettings& q, const char* what) {
  require_radius(r, scn.b().norm(), scn.r_max(), what);
  const double pref = J_prefactor(scn, r);
  const RegionSpec region =
      RegionSpec::sublevel([&scn](const VecN& x) { return scn.preimage_radius(x); }, r);
  return scaled(integrate_region(scn.patch(), g, region, scn.quadrature_options(q.tol / pref, q.max_depth)),
                pref);
}

QuadratureResult level_integral(const Scenario& scn, double s, const Integrand& g,
                                const QuadratureSettings& q) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidParameter, "Q needs s > 0");
  const double pref = std::pow(s, -0.5 * scn.k());
  const RegionSpec region = RegionSpec::sublevel([&scn](const VecN& x) { return scn.region_f(x); }, s);
  return scaled(integrate_region(scn.patch(), g, region, scn.quadrature_options(q.tol / pref, q.max_depth)),
                pref);
}

}  // namespace

QuadratureResult J_of_r(const Scenario& scn, double r, const QuadratureSettings& q) {
  return ball_integral(scn, r, [](const SurfaceSample&) { return 1.0; }, q, "J");
}

QuadratureResult I_of_r(const Scenario& scn, double r, const QuadratureSettings& q) {
  const VecN c = scn.center();
  return ball_integral(scn, r, [c](const SurfaceSample& s) { return tangential_ratio(s, c); }, q, "I");
}

QuadratureResult Q_A(const Scenario& scn, double s, const QuadratureSettings& q) {
  return level_integral(scn, s, [](const SurfaceSample&) { return 1.0; }, q);
}

QuadratureResult Q_I(const Scenario& scn, double s, const QuadratureSettings& q) {
  const VecN c = scn.center();
  return level_integral(scn, s, [c](const SurfaceSample& smp) { return tangential_ratio(smp, c); }, q);
}

IdentityResidual make_residual(double lhs, double rhs, double error_sum, bool tol_met) {
  IdentityResidual out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.residual = lhs - rhs;
  out.budget = 3.0 * error_sum + 1e-12 * std::abs(lhs);
  out.pass = std::abs(out.residual) <= out.budget;
  out.tol_met = tol_met;
  return out;
}

namespace {

void require_pair(const Scenario& scn, double r_lo, double r_hi) {
  if (!(r_lo > 0.0) || !(r_lo < r_hi) || r_hi > scn.r_max()) {
    throw Error(ErrorCode::InvalidParameter, "radius pair must satisfy 0 < r_lo < r_hi <= r_max");
  }
}

QuadratureResult band_integral(const Scenario& scn, double r_lo, double r_hi, const Integrand& g,
                               const QuadratureSettings& q) {
  const double Rk = std::pow(scn.R(), scn.k());
  const RegionSpec band = RegionSpec::band([&scn](const VecN& x) { return scn.region_f(x); },
                                           s_of_r(r_lo, scn.b(), scn.R()), s_of_r(r_hi, scn.b(), scn.R()));
  return scaled(integrate_region(scn.patch(), g, band, scn.quadrature_options(q.tol / Rk, q.max_depth)), Rk);
}

}  // namespace

IdentityResidual volume_identity_residual(const Scenario& scn, double r_lo, double r_hi,
                                          const QuadratureSettings& q, const QuadratureResult* J_lo,
                                          const QuadratureResult* J_hi) {
  require_pair(scn, r_lo, r_hi);
  const QuadratureResult lo = J_lo ? *J_lo : J_of_r(scn, r_lo, q);
  const QuadratureResult hi = J_hi ? *J_hi : J_of_r(scn, r_hi, q);
  const int k = scn.k();
  const double b4 = std::pow(scn.b().squaredNorm(), 2);
  const VecN c = scn.center();
  const VecN d = scn.direction();
  const auto integrand = [&](const SurfaceSample& s) {
    const VecN u = s.position - c;
    const double u2 = u.squaredNorm();
    const double f = scn.f(s.position);
    const double normal2 = std::max(0.0, u2 - tangential_norm2(u, s.frame));
    return std::pow(f, -0.5 * k) * (b4 * normal2 + f * f * tangential_norm2(d, s.frame)) / (b4 * u2);
  };
  const QuadratureResult band = band_integral(scn, r_lo, r_hi, integrand, q);
  return make_residual(hi.value - lo.value, band.value,
                       lo.error_estimate + hi.error_estimate + band.error_estimate,
                       lo.tol_met && hi.tol_met && band.tol_met);
}

IdentityResidual weighted_identity_residual(const Scenario& scn, double r_lo, double r_hi,
                                            const QuadratureSettings& q, int rho_nodes,
                                            const QuadratureResult* I_lo, const QuadratureResult* I_hi) {
  require_pair(scn, r_lo, r_hi);
  const QuadratureResult lo = I_lo ? *I_lo : I_of_r(scn, r_lo, q);
  const QuadratureResult hi = I_hi ? *I_hi : I_of_r(scn, r_hi, q);
  const int k = scn.k();
  const double b2 = scn.b().squaredNorm();
  const VecN c = scn.center();
  const VecN d = scn.direction();

  const auto band_integrand = [&](const SurfaceSample& s) {
    const VecN u = s.position - c;
    const double f = scn.f(s.position);
    return std::pow(f, -0.5 * (k - 4)) * tangential_norm2(d, s.frame) / (b2 * b2 * u.squaredNorm());
  };
  const QuadratureResult band = band_integral(scn, r_lo, r_hi, band_integrand, q);

  const auto weight = [&](double rho) { return std::pow(b2 - rho * rho, 0.5 * (k - 2)) / std::pow(rho, k + 1); };
  const double weight_total =
      radial_integral(std::function<double(double)>(weight), r_lo, r_hi, rho_nodes, 1e-12).value;
  const double outer = k * b2;
  const double inner_tol = q.tol / (4.0 * outer * weight_total);
  const auto normal_part = [c](const SurfaceSample& s) { return normal_ratio(s, c); };
  bool inner_tol_met = true;
  const std::function<Estimate(double)> inner = [&](double rho) {
    const RegionSpec region = RegionSpec::sublevel([&scn](const VecN& x) { return scn.region_f(x); },
                                                   s_of_r(rho, scn.b(), scn.R()));
    const QuadratureResult S =
        integrate_region(scn.patch(), normal_part, region, scn.quadrature_options(inner_tol, q.max_depth));
    inner_tol_met = inner_tol_met && S.tol_met;
    const double w = weight(rho);
    return Estimate{w * S.value, w * S.error_estimate};
  };
  const RadialResult radial = radial_integral(inner, r_lo, r_hi, rho_nodes, 2.0 * q.tol / outer);

  const double rhs = band.value + outer * radial.value;
  const double err = lo.error_estimate + hi.error_estimate + band.error_estimate +
                     outer * (radial.error_estimate + radial.inner_error);
  return make_residual(hi.value - lo.value, rhs, err,
                       lo.tol_met && hi.tol_met && band.tol_met && radial.tol_met && inner_tol_met);
}

namespace {

void require_surface_dim2(const Scenario& scn, const char* what) {
  if (scn.k() != 2) throw Error(ErrorCode::InvalidParameter, std::string(what) + " needs k = 2");
}

TwoSidedCheck two_sided(double lhs, double rhs, double error_sum) {
  TwoSidedCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.budget = 3.0 * error_sum + 1e-12 * std::abs(lhs);
  out.pass = std::abs(lhs - rhs) <= out.budget;
  return out;
}

ScalarField weight_field(const Scenario& scn) {
  return ScalarField{[&scn](const VecN& x) { return scn.region_f(x); },
                     [&scn](const VecN& x) { return scn.grad_f(x); }};
}

}  // namespace

TwoSidedCheck flux_identity_check(const Scenario& scn, double s, const QuadratureSettings& q) {
  require_surface_dim2(scn, "flux check");
  const double b2 = scn.b().squaredNorm();
  const VecN c = scn.center();
  const VecN d = scn.direction();
  const auto flux = [&](const SurfaceSample& smp) {
    const VecN g = scn.surface_grad_f(smp);
    const VecN X = smp.position - c - (s / b2) * d;
    return X.dot(g) / g.norm();
  };
  const QuadratureOptions opts = scn.quadrature_options(q.tol, q.max_depth);
  const QuadratureResult line = level_curve_integral(scn.patch(), weight_field(scn), s, flux, opts);
  const RegionSpec region = RegionSpec::sublevel([&scn](const VecN& x) { return scn.region_f(x); }, s);
  const QuadratureResult area =
      integrate_region(scn.patch(), [](const SurfaceSample&) { return 1.0; }, region, opts);
  const int k = scn.k();
  return two_sided(line.value, k * area.value, line.error_estimate + k * area.error_estimate);
}

TwoSidedCheck coarea_check(const Scenario& scn, double s, double t, const QuadratureSettings& q) {
  require_surface_dim2(scn, "coarea check");
  if (!(0.0 < s && s < t)) throw Error(ErrorCode::InvalidParameter, "coarea check needs 0 < s < t");
  const QuadratureOptions opts = scn.quadrature_options(q.tol, q.max_depth);
  const RegionSpec band = RegionSpec::band([&scn](const VecN& x) { return scn.region_f(x); }, s, t);
  const QuadratureResult lhs = integrate_region(
      scn.patch(), [&scn](const SurfaceSample& smp) { return scn.surface_grad_f(smp).norm(); }, band, opts);

  QuadratureOptions line_opts = opts;
  line_opts.tol = q.tol / (4.0 * (t - s));
  const ScalarField field = weight_field(scn);
  const std::function<Estimate(double)> length = [&](double tau) {
    const QuadratureResult L =
        level_curve_integral(scn.patch(), field, tau, [](const SurfaceSample&) { return 1.0; }, line_opts);
    return Estimate{L.value, L.error_estimate};
  };
  const RadialResult rhs = radial_integral(length, s, t, 4, q.tol);
  return two_sided(lhs.value, rhs.value, lhs.error_estimate + rhs.error_estimate + rhs.inner_error);
}

double level_pairing_max_error(const Scenario& scn, int grid) {
  const double b2 = scn.b().squaredNorm();
  const VecN c = scn.center();
  const VecN d = scn.direction();
  double worst = 0.0;
  for (const auto& u : interior_grid(scn.patch().domain(), grid)) {
    const SurfaceSample smp = sample(scn.patch(), u);
    const VecN x = smp.position - c;
    const double x2 = x.squaredNorm();
    if (x2 == 0.0) continue;
    const double s = scn.f(smp.position);
    const VecN X = x - (s / b2) * d;
    const double lhs = X.dot(scn.surface_grad_f(smp));
    const double xt2 = tangential_norm2(x, smp.frame);
    const double dt2 = tangential_norm2(d, smp.frame) * s * s / (b2 * b2);
    const double rhs = (2.0 * s / x2) * (xt2 - dt2);
    const double scale = (2.0 * s / x2) * (xt2 + dt2);
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

VecN surface_gradient_fd(const Scenario& scn, const ParamVec& u, double h) {
  const ParametricPatch& patch = scn.patch();
  const int k = patch.k();
  const auto g = [&](const ParamVec& v) { return scn.f(patch.eval(v)); };
  const auto partials = [&](double step) {
    ParamVec out(k);
    for (int i = 0; i < k; ++i) {
      ParamVec up = u;
      ParamVec um = u;
      up(i) += step;
      um(i) -= step;
      out(i) = (g(up) - g(um)) / (2.0 * step);
    }
    return out;
  };
  const ParamVec dg = (4.0 * partials(0.5 * h) - partials(h)) / 3.0;
  const MatN jac = patch.jacobian(u);
  const MatN gram = jac.transpose() * jac;
  return jac * (gram.inverse() * dg);
}

GradientCheck gradient_check(const Scenario& scn, int grid) {
  GradientCheck out;
  const double h = 1e-3 * scn.patch().domain().max_extent();
  for (const auto& u : interior_grid(scn.patch().domain(), grid)) {
    const SurfaceSample smp = sample(scn.patch(), u);
    const VecN closed = scn.surface_grad_f(smp);
    if (closed.norm() < 1e-8) continue;
    const VecN fd = surface_gradient_fd(scn, u, h);
    out.max_rel_error = std::max(out.max_rel_error, (closed - fd).norm() / closed.norm());
    ++out.samples;
  }
  return out;
}

DivergenceSummary div_W_summary(const Scenario& scn, int grid) {
  DivergenceSummary out;
  const Decomposition& dec = scn.decomposition();
  for (const auto& u : interior_grid(scn.patch().domain(), grid)) {
    const SurfaceSample smp = sample(scn.patch(), u);
    const VecN y = dec.psi.apply_inverse(smp.position);
    if ((y - dec.a).norm() < 1e-6) continue;
    const MatN frame = dec.psi.linear().transpose() * smp.frame.vectors();
    const SurfaceSample local{smp.param, y, Frame(frame), smp.area_element};
    const DivergenceCheck chk = div_W_check(local, dec.b, dec.R);
    // Normalise by the largest single term so vanishing divergences stay meaningful.
    const int k = scn.k();
    const double f = f_reflection(y, dec.b, dec.R);
    const double scale = std::max({std::abs(chk.closed_form), std::pow(f, -0.5 * k),
                                   std::pow(f, -0.5 * (k - 2)) / (dec.b.norm() * (y - dec.a).norm())});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(chk.closed_form - chk.fd_value) / scale);
    out.max_abs_closed = std::max(out.max_abs_closed, std::abs(chk.closed_form));
    ++out.samples;
  }
  return out;
}

ParamVec closest_param(const ParametricPatch& patch, const VecN& x) {
  const ParamBox& box = patch.domain();
  const int k = patch.k();
  const int side = k <= 2 ? 32 : (k == 3 ? 12 : 6);
  ParamVec best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const auto& u : interior_grid(box, side)) {
    const double d2 = (patch.eval(u) - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = u;
    }
  }
  for (int iter = 0; iter < 60; ++iter) {
    const MatN jac = patch.jacobian(best);
    const VecN r = patch.eval(best) - x;
    const MatN gram = jac.transpose() * jac;
    ParamVec step = -(gram.inverse() * (jac.transpose() * r));
    ParamVec next = best + step;
    for (int d = 0; d < k; ++d) next(d) = std::clamp(next(d), box.lo(d), box.hi(d));
    const double d2 = (patch.eval(next) - x).squaredNorm();
    if (!(d2 < best_d2)) break;
    best_d2 = d2;
    best = next;
  }
  return best;
}

double unit_ball_volume(int k) { return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0); }

PrescribedPointResult prescribed_point_bound(const ParametricPatch& patch, const VecN& a,
                                             const QuadratureSettings& q) {
  if (a.size() != patch.n()) throw Error(ErrorCode::InvalidParameter, "prescribed point: dimension mismatch");
  const double a2 = a.squaredNorm();
  if (!(a2 < 1.0)) throw Error(ErrorCode::InvalidParameter, "prescribed point must satisfy |a| < 1");
  const ParamVec u = closest_param(patch, a);
  const double dist = (patch.eval(u) - a).norm();
  if (dist > 1e-8) {
    throw Error(ErrorCode::PointNotOnSurface,
                "prescribed point is " + std::to_string(dist) + " away from the surface");
  }
  for (const auto& v : face_samples(patch, 256)) {
    if (patch.eval(v).norm() < 1.0) {
      throw Error(ErrorCode::CoverageViolated, "patch boundary enters the unit ball");
    }
  }
  QuadratureOptions opts;
  opts.tol = q.tol;
  opts.max_depth = q.max_depth;
  const RegionSpec region = RegionSpec::sublevel([](const VecN& x) { return x.norm(); }, 1.0);
  const QuadratureResult area = integrate_region(patch, [](const SurfaceSample&) { return 1.0; }, region, opts);
  PrescribedPointResult out;
  out.area = area.value;
  out.area_error = area.error_estimate;
  out.bound = unit_ball_volume(patch.k()) * std::pow(1.0 - a2, 0.5 * patch.k());
  out.slack = out.area - out.bound;
  out.budget = 3.0 * area.error_estimate + 1e-12 * std::abs(area.value);
  out.pass = out.slack >= -out.budget;
  return out;
}

EqualityDiagnostics equality_diagnostics(const Scenario& scn, int grid) {
  EqualityDiagnostics out;
  const VecN c = scn.center();
  const VecN d = scn.direction();
  for (const auto& u : interior_grid(scn.patch().domain(), grid)) {
    const SurfaceSample smp = sample(scn.patch(), u);
    if (!(scn.preimage_radius(smp.position) < scn.r_max())) continue;
    const Projection p = project(smp.position - c, smp.frame);
    out.normal_sup = std::max(out.normal_sup, p.normal.norm());
    out.direction_sup = std::max(out.direction_sup, std::sqrt(tangential_norm2(d, smp.frame)));
  }
  return out;
}

MonotonicityReport monotone_sweep(const Scenario& scn, const std::vector<double>& radii,
                                  const QuadratureSettings& q) {
  if (radii.empty()) throw Error(ErrorCode::InvalidParameter, "sweep: empty radius grid");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require_radius(radii[i], scn.b().norm(), scn.r_max(), "sweep");
    if (i > 0 && !(radii[i] > radii[i - 1])) {
      throw Error(ErrorCode::InvalidParameter, "sweep: radii must be strictly increasing");
    }
  }
  MonotonicityReport report;
  const double Rk = std::pow(scn.R(), scn.k());
  for (double r : radii) {
    RadiusRow row;
    row.r = r;
    row.s = s_of_r(r, scn.b(), scn.R());
    row.J = J_of_r(scn, r, q);
    row.I = I_of_r(scn, r, q);
    const QuadratureSettings qs{q.tol / Rk, q.max_depth};
    row.QA = Q_A(scn, row.s, qs);
    row.QI = Q_I(scn, row.s, qs);
    report.rows.push_back(row);
  }
  bool pass = true;
  bool constant = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const RadiusRow& lo = report.rows[i - 1];
    const RadiusRow& hi = report.rows[i];
    PairRow pr;
    pr.r_lo = lo.r;
    pr.r_hi = hi.r;
    pr.volume = volume_identity_residual(scn, lo.r, hi.r, q, &lo.J, &hi.J);
    pr.weighted = weighted_identity_residual(scn, lo.r, hi.r, q, 4, &lo.I, &hi.I);
    const double dJ = hi.J.value - lo.J.value;
    const double dI = hi.I.value - lo.I.value;
    pr.J_monotone = dJ >= -3.0 * (lo.J.error_estimate + hi.J.error_estimate);
    pr.I_monotone = dI >= -3.0 * (lo.I.error_estimate + hi.I.error_estimate);
    pass = pass && pr.volume.pass && pr.weighted.pass && pr.J_monotone && pr.I_monotone;
    constant = constant && std::abs(dJ) <= pr.volume.budget && std::abs(dI) <= pr.weighted.budget;
    report.pairs.push_back(pr);
  }
  report.equality = equality_diagnostics(scn);
  report.equality.constant = constant;
  report.pass = pass;
  return report;
}

}  // namespace mobius_mono
