#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>

#include "mobius_mono/quadrature.hpp"
#include "test_support.hpp"

using namespace mobius_mono;
using mobius_mono::test::frame_of;
using mobius_mono::test::vec;

namespace {

constexpr double kPi = std::numbers::pi;

// Weight function for b = (2,0,0), R = 1, written out independently of the
// monotonicity module.
const VecN kB = vec({2, 0, 0});
const VecN kA = vec({1.5, 0, 0});
constexpr double kR = 1.0;

double weight(const VecN& x) {
  const double d = 2.0 * kB.squaredNorm() - kR * kR - 2.0 * kB.dot(x);
  if (d <= 0.0) return DBL_MAX;
  return kB.squaredNorm() * (x - kA).squaredNorm() / d;
}

VecN weight_gradient(const VecN& x) {
  const double d = 2.0 * kB.squaredNorm() - kR * kR - 2.0 * kB.dot(x);
  const double num = kB.squaredNorm() * (x - kA).squaredNorm();
  return (2.0 * kB.squaredNorm() * (x - kA) * d + 2.0 * num * kB) / (d * d);
}

ScalarField weight_field() { return {weight, weight_gradient}; }

ParametricPatch disk() { return flat_disk(vec({1.5, 0, 0}), frame_of({vec({0, 1, 0}), vec({0, 0, 1})}), 1.0); }

/// Plane through (1.35,0,0) that is not aligned with the parameter axes.
ParametricPatch tilted_plane(double extent = 0.5) {
  return flat_disk(vec({1.35, 0, 0}), frame_of({vec({0.3, 1, 0}), vec({0.2, 0, 1})}), extent);
}

double s_of(double r) { return kR * kR * r * r / (kB.squaredNorm() - r * r); }

// Area of plane-through-p (unit normal nu) intersected with the ball sigma(B_r).
double plane_ball_area(const VecN& p, const VecN& nu, double r) {
  const double b2 = kB.squaredNorm();
  const VecN c = ((b2 - kR * kR - r * r) / (b2 - r * r)) * kB;
  const double rho = kR * kR * r / (b2 - r * r);
  const double dist = (c - p).dot(nu);
  return kPi * (rho * rho - dist * dist);
}

VecN tilted_normal() {
  const Frame f = frame_of({vec({0.3, 1, 0}), vec({0.2, 0, 1})});
  const Eigen::Vector3d e0 = f.vector(0);
  const Eigen::Vector3d e1 = f.vector(1);
  return VecN(e0.cross(e1).normalized());
}

double one(const SurfaceSample&) { return 1.0; }

}  // namespace

TEST(GaussLegendre, ExactForPolynomials) {
  for (int n = 1; n <= 32; ++n) {
    const GaussRule& g = gauss_legendre(n);
    ASSERT_EQ(g.nodes.size(), static_cast<std::size_t>(n));
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    EXPECT_NEAR(wsum, 2.0, 1e-14);
    const int deg = 2 * n - 2;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) integral += g.weights[i] * std::pow(g.nodes[i], deg);
    EXPECT_NEAR(integral, 2.0 / (deg + 1), 1e-13);
  }
  EXPECT_THROW(gauss_legendre(0), Error);
}

TEST(IntegrateRegion, WholeUnitSquare) {
  const ParametricPatch square = flat_disk(vec({0, 0, 0}), frame_of({vec({1, 0, 0}), vec({0, 1, 0})}), 0.5);
  const QuadratureResult r = integrate_region(square, one, RegionSpec::whole());
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_TRUE(r.tol_met);
  EXPECT_FALSE(r.depth_hit);
}

TEST(IntegrateRegion, SublevelDiskArea) {
  const double s = s_of(1.0);
  EXPECT_NEAR(s, 1.0 / 3.0, 1e-15);
  const QuadratureResult r = integrate_region(disk(), one, RegionSpec::sublevel(weight, s));
  const double truth = kPi / 12.0;
  EXPECT_NEAR(r.value, 0.261799, 1e-6);
  EXPECT_NEAR(r.value, truth, 1e-7);
  EXPECT_LE(std::abs(r.value - truth), 3.0 * r.error_estimate);
}

TEST(IntegrateRegion, TangentialRatioEqualsArea) {
  const double s = s_of(1.0);
  QuadratureOptions opts;
  opts.singular_param = vec({0, 0});
  const auto ratio = [](const SurfaceSample& smp) {
    const VecN x = smp.position - kA;
    return tangential_norm2(x, smp.frame) / x.squaredNorm();
  };
  const QuadratureResult r = integrate_region(disk(), ratio, RegionSpec::sublevel(weight, s), opts);
  EXPECT_NEAR(r.value, kPi / 12.0, 1e-7);
  EXPECT_LE(std::abs(r.value - kPi / 12.0), 3.0 * r.error_estimate);
}

TEST(IntegrateRegion, TiltedPlaneCutsBall) {
  const VecN nu = tilted_normal();
  for (double rr : {0.6, 1.0, 1.4}) {
    const QuadratureResult r = integrate_region(tilted_plane(1.2), one, RegionSpec::sublevel(weight, s_of(rr)));
    const double truth = plane_ball_area(vec({1.35, 0, 0}), nu, rr);
    EXPECT_NEAR(r.value, truth, 1e-7) << rr;
    EXPECT_LE(std::abs(r.value - truth), 3.0 * r.error_estimate) << rr;
  }
}

TEST(IntegrateRegion, ThrowsOnNonFiniteIntegrand) {
  const auto bad = [](const SurfaceSample& smp) {
    return smp.param(0) > 0.2 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  try {
    integrate_region(disk(), bad, RegionSpec::whole());
    FAIL() << "expected NonFiniteIntegrand";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteIntegrand);
  }
}

TEST(IntegrateRegion, ReportsUnmetTolerance) {
  QuadratureOptions opts;
  opts.tol = 1e-15;
  opts.max_depth = 4;
  const QuadratureResult r = integrate_region(disk(), one, RegionSpec::sublevel(weight, s_of(1.0)), opts);
  EXPECT_TRUE(r.depth_hit);
  EXPECT_FALSE(r.tol_met);
  EXPECT_LE(std::abs(r.value - kPi / 12.0), 3.0 * r.error_estimate);
}

TEST(IntegrateRegion, RejectsInvalidRegions) {
  EXPECT_THROW(RegionSpec::sublevel(weight, 0.0), Error);
  EXPECT_THROW(RegionSpec::band(weight, 0.5, 0.2), Error);
}

TEST(IntegrateRegionProperty, HonestErrorOnClosedForms) {
  for (double rr : {0.3, 0.8, 1.4}) {
    const double s = s_of(rr);
    const double truth = kPi * s / 4.0;
    for (double tol : {1e-4, 1e-6, 1e-8}) {
      QuadratureOptions opts;
      opts.tol = tol;
      const QuadratureResult r = integrate_region(disk(), one, RegionSpec::sublevel(weight, s), opts);
      EXPECT_LE(std::abs(r.value - truth), 3.0 * r.error_estimate) << rr << " " << tol;
      EXPECT_LE(std::abs(r.value - truth), tol) << rr << " " << tol;
    }
  }
}

TEST(IntegrateRegionProperty, MonotoneRefinement) {
  for (double rr : {0.3, 1.0}) {
    const double s = s_of(rr);
    const double truth = kPi * s / 4.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double tol = 1e-3; tol > 1e-9; tol *= 0.5) {
      QuadratureOptions opts;
      opts.tol = tol;
      const double err = std::abs(integrate_region(disk(), one, RegionSpec::sublevel(weight, s), opts).value - truth);
      EXPECT_LE(err, prev) << rr << " " << tol;
      prev = err;
    }
  }
}

TEST(IntegrateRegionProperty, SublevelsAreAdditive) {
  const double lo = s_of(0.5);
  const double hi = s_of(1.2);
  for (const ParametricPatch& patch : {disk(), tilted_plane()}) {
    const QuadratureResult a = integrate_region(patch, one, RegionSpec::sublevel(weight, lo));
    const QuadratureResult b = integrate_region(patch, one, RegionSpec::band(weight, lo, hi));
    const QuadratureResult c = integrate_region(patch, one, RegionSpec::sublevel(weight, hi));
    EXPECT_LE(std::abs(c.value - a.value - b.value), a.error_estimate + b.error_estimate + c.error_estimate);
  }
}

TEST(IntegrateRegionProperty, ThreadCountDoesNotChangeBits) {
  const auto integrand = [](const SurfaceSample& smp) { return std::exp(smp.position(1)) * smp.position(2); };
  QuadratureOptions one_thread;
  one_thread.threads = 1;
  QuadratureOptions four_threads;
  four_threads.threads = 4;
  const RegionSpec region = RegionSpec::sublevel(weight, s_of(1.3));
  const QuadratureResult a = integrate_region(tilted_plane(), integrand, region, one_thread);
  const QuadratureResult b = integrate_region(tilted_plane(), integrand, region, four_threads);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.error_estimate, b.error_estimate);
  EXPECT_EQ(a.cells_used, b.cells_used);
}

TEST(IntegrateRegion, NonSymmetricSurface) {
  // Enneper over its full square: the area element is (1 + u^2 + v^2)^2.
  const ParametricPatch e = enneper().with_domain(ParamBox{vec({-0.5, -0.3}), vec({0.7, 0.4})});
  const auto prim = [](double u, double v) {
    // Antiderivative of (1 + u^2 + v^2)^2 in u and v.
    return u * v + 2.0 * (u * u * u * v + u * v * v * v) / 3.0 + std::pow(u, 5) * v / 5.0 +
           std::pow(v, 5) * u / 5.0 + 2.0 * std::pow(u, 3) * std::pow(v, 3) / 9.0;
  };
  const double truth = prim(0.7, 0.4) - prim(-0.5, 0.4) - prim(0.7, -0.3) + prim(-0.5, -0.3);
  const QuadratureResult r = integrate_region(e, one, RegionSpec::whole());
  EXPECT_NEAR(r.value, truth, 1e-12);
}

TEST(LevelCurve, DiskCircumference) {
  const QuadratureResult r = level_curve_integral(disk(), weight_field(), 1.0 / 3.0, one);
  EXPECT_NEAR(r.value, 2.0 * kPi / (2.0 * std::sqrt(3.0)), 1e-7);
  EXPECT_NEAR(r.value, 1.8138, 1e-4);
}

TEST(LevelCurve, TiltedPlaneCircumference) {
  const VecN nu = tilted_normal();
  for (double rr : {0.6, 1.2}) {
    const double area = plane_ball_area(vec({1.35, 0, 0}), nu, rr);
    const QuadratureResult r = level_curve_integral(tilted_plane(), weight_field(), s_of(rr), one);
    EXPECT_NEAR(r.value, 2.0 * std::sqrt(kPi * area), 1e-7) << rr;
  }
}

TEST(LevelCurve, FiniteDifferenceGradientFallback) {
  const ScalarField no_grad{weight, {}};
  const QuadratureResult r = level_curve_integral(disk(), no_grad, 1.0 / 3.0, one);
  EXPECT_NEAR(r.value, kPi / std::sqrt(3.0), 1e-6);
}

TEST(LevelCurve, FluxEqualsKTimesArea) {
  const VecN nu = tilted_normal();
  for (double rr : {0.5, 1.1}) {
    const double s = s_of(rr);
    const auto flux = [s](const SurfaceSample& smp) {
      const VecN xs = smp.position - kA - (s / kB.squaredNorm()) * kB;
      const VecN g = project(weight_gradient(smp.position), smp.frame).tangential;
      return xs.dot(g) / g.norm();
    };
    const QuadratureResult lhs = level_curve_integral(tilted_plane(), weight_field(), s, flux);
    const QuadratureResult area = integrate_region(tilted_plane(), one, RegionSpec::sublevel(weight, s));
    EXPECT_NEAR(lhs.value, 2.0 * area.value, 1e-6) << rr;
    EXPECT_NEAR(area.value, plane_ball_area(vec({1.35, 0, 0}), nu, rr), 1e-7);
  }
}

TEST(LevelCurve, CoareaTwoSided) {
  const double s = s_of(0.5);
  const double t = s_of(1.2);
  const auto grad_norm = [](const SurfaceSample& smp) {
    return project(weight_gradient(smp.position), smp.frame).tangential.norm();
  };
  const QuadratureResult lhs = integrate_region(disk(), grad_norm, RegionSpec::band(weight, s, t));
  const RadialResult rhs = radial_integral(
      [](double tau) {
        const QuadratureResult q = level_curve_integral(disk(), weight_field(), tau, one);
        return Estimate{q.value, q.error_estimate};
      },
      s, t, 4, 1e-9);
  const double truth = 2.0 * kPi / 3.0 * (std::pow(t, 1.5) - std::pow(s, 1.5));
  EXPECT_LE(std::abs(lhs.value - rhs.value), 3.0 * (lhs.error_estimate + rhs.error_estimate + rhs.inner_error) + 1e-9);
  EXPECT_NEAR(lhs.value, truth, 1e-7);
  EXPECT_NEAR(rhs.value, truth, 1e-7);
}

TEST(LevelCurve, DegenerateLevelIsRejected) {
  try {
    level_curve_integral(disk(), weight_field(), 1e-20, one);
    FAIL() << "expected NonRegularLevel";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonRegularLevel);
  }
}

TEST(LevelCurve, RequiresTwoDimensionalPatch) {
  const ParametricPatch curve = flat_disk(vec({1.5, 0, 0}), frame_of({vec({0, 1, 0})}), 1.0);
  EXPECT_THROW(level_curve_integral(curve, weight_field(), 0.1, one), Error);
}

TEST(RadialIntegral, Constant) {
  const RadialResult r = radial_integral([](double) { return 2.5; }, 0.3, 1.7);
  EXPECT_NEAR(r.value, 2.5 * 1.4, 1e-13);
  EXPECT_TRUE(r.tol_met);
}

TEST(RadialIntegral, Quadratic) {
  EXPECT_NEAR(radial_integral([](double x) { return x * x; }, 0.0, 1.0).value, 1.0 / 3.0, 1e-12);
}

TEST(RadialIntegral, WeightedSurfaceIntegralAgainstTrapezoid) {
  // k = 3 weight (|b|^2 - rho^2)^{1/2} / rho^4 times a fixed surface integral.
  const double cached = integrate_region(disk(), one, RegionSpec::sublevel(weight, s_of(0.7))).value;
  const auto inner = [cached](double rho) { return std::sqrt(4.0 - rho * rho) / std::pow(rho, 4) * cached; };
  const RadialResult r = radial_integral(inner, 0.5, 0.9, 4, 1e-12);
  const int panels = 1 << 20;
  const double h = 0.4 / panels;
  double trap = 0.5 * (inner(0.5) + inner(0.9));
  for (int i = 1; i < panels; ++i) trap += inner(0.5 + i * h);
  trap *= h;
  EXPECT_NEAR(r.value, trap, 1e-8);
}

TEST(RadialIntegral, ReportsUnmetTolerance) {
  const RadialResult r = radial_integral([](double x) { return std::sin(1.0 / x); }, 1e-3, 1.0, 2, 1e-14, 4);
  EXPECT_FALSE(r.tol_met);
}

TEST(RadialIntegral, RejectsEmptyInterval) {
  EXPECT_THROW(radial_integral([](double) { return 1.0; }, 1.0, 1.0), Error);
}
