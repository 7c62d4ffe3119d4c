#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mobius_mono/surfaces.hpp"
#include "test_support.hpp"

using namespace mobius_mono;
using mobius_mono::test::frame_of;
using mobius_mono::test::vec;

namespace {

ParametricPatch disk_at_1_5() { return flat_disk(vec({1.5, 0, 0}), frame_of({vec({0, 1, 0}), vec({0, 0, 1})}), 1.0); }

}  // namespace

TEST(Sample, FlatDiskIsIsometric) {
  const ParametricPatch disk = disk_at_1_5();
  for (const VecN& u : {vec({0, 0}), vec({0.3, -0.9}), vec({-1, 1})}) {
    const SurfaceSample s = sample(disk, u);
    EXPECT_NEAR(s.area_element, 1.0, 1e-15);
    EXPECT_LT((s.position - vec({1.5, u(0), u(1)})).norm(), 1e-15);
  }
}

TEST(Sample, CatenoidFirstFundamentalForm) {
  const ParametricPatch cat = catenoid(1.0);
  const SurfaceSample s0 = sample(cat, vec({0, 0}));
  EXPECT_LT((s0.position - vec({1, 0, 0})).norm(), 1e-15);
  EXPECT_NEAR(s0.area_element, 1.0, 1e-14);
  const SurfaceSample s1 = sample(cat, vec({0, 1}));
  EXPECT_NEAR(s1.area_element, std::cosh(1.0) * std::cosh(1.0), 1e-12);
  EXPECT_NEAR(s1.area_element, 2.381, 5e-4);
}

TEST(SampleProperty, AreaElementMatchesClosedForms) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uu(-3.0, 3.0);
  std::uniform_real_distribution<double> uv(-0.95, 0.95);
  for (double c : {0.5, 1.0, 2.0}) {
    const ParametricPatch cat = catenoid(c);
    for (int i = 0; i < 50; ++i) {
      const VecN p = vec({uu(rng), uv(rng)});
      const double expected = c * std::pow(std::cosh(p(1) / c), 2);
      EXPECT_NEAR(sample(cat, p).area_element, expected, 1e-10 * expected);
    }
  }
  for (double pitch : {0.3, 1.0}) {
    const ParametricPatch hel = helicoid(pitch);
    for (int i = 0; i < 50; ++i) {
      const VecN p = vec({uu(rng), uv(rng)});
      const double expected = std::sqrt(p(1) * p(1) + pitch * pitch);
      EXPECT_NEAR(sample(hel, p).area_element, expected, 1e-10 * expected);
    }
  }
}

TEST(SampleProperty, FrameSplitsPositionVector) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  const VecN c = vec({0.3, -0.2, 2.0});
  for (const ParametricPatch& patch : {catenoid(1.0), helicoid(0.5), enneper()}) {
    for (int i = 0; i < 50; ++i) {
      const SurfaceSample s = sample(patch, vec({u(rng), u(rng)}));
      const VecN x = s.position - c;
      const Projection p = project(x, s.frame);
      EXPECT_NEAR(p.tangential.squaredNorm() + p.normal.squaredNorm(), x.squaredNorm(), 1e-12 * x.squaredNorm());
    }
  }
}

TEST(Sample, FrameSpansJacobianColumns) {
  const ParametricPatch hel = helicoid(0.7);
  const VecN u = vec({0.4, 0.6});
  const SurfaceSample s = sample(hel, u);
  const MatN j = hel.jacobian(u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(project(j.col(i), s.frame).normal.norm(), 1e-12);
  }
}

TEST(Sample, FiniteDifferenceJacobianMatchesAnalytic) {
  const ParametricPatch cat = catenoid(1.0);
  const ParametricPatch fd("catenoid-fd", 3, cat.domain(), [cat](const ParamVec& u) { return cat.eval(u); });
  EXPECT_FALSE(fd.has_analytic_jacobian());
  const VecN u = vec({0.7, -0.4});
  EXPECT_LT((fd.jacobian(u) - cat.jacobian(u)).norm(), 1e-8);
}

TEST(Sample, RejectsParameterOutsideDomain) {
  EXPECT_THROW(sample(enneper(), vec({1.5, 0})), Error);
}

TEST(MeanCurvature, FlatDiskVanishes) {
  const ParametricPatch disk = disk_at_1_5();
  const double h = default_curvature_step(disk);
  EXPECT_LE(mean_curvature_norm(disk, vec({0.1, -0.3}), h), 1e-8);
  EXPECT_LE(max_mean_curvature(disk), 1e-8);
}

TEST(MeanCurvature, CatenoidRandomInteriorPoints) {
  const ParametricPatch cat = catenoid(1.0);
  const double h = default_curvature_step(cat);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uu(-3.0, 3.0);
  std::uniform_real_distribution<double> uv(-0.9, 0.9);
  for (int i = 0; i < 20; ++i) EXPECT_LE(mean_curvature_norm(cat, vec({uu(rng), uv(rng)}), h), 1e-6);
}

TEST(MeanCurvature, RoundSphereNegativeControl) {
  for (double rho : {0.5, 1.0, 3.0}) {
    const ParametricPatch sph = round_sphere(rho);
    const double h = default_curvature_step(sph);
    for (const VecN& u : {vec({0.0, 0.0}), vec({1.0, 0.5}), vec({-2.0, -0.8})}) {
      EXPECT_NEAR(mean_curvature_norm(sph, u, h), 2.0 / rho, 1e-4 * 2.0 / rho);
    }
  }
}

TEST(MeanCurvature, MeanCurvatureVectorIsNormal) {
  const ParametricPatch sph = round_sphere(2.0);
  const VecN u = vec({0.3, 0.4});
  const VecN hv = mean_curvature_vector(sph, u, default_curvature_step(sph));
  const SurfaceSample s = sample(sph, u);
  EXPECT_LT(project(hv, s.frame).tangential.norm(), 1e-6);
  // Points toward the center.
  EXPECT_LT(hv.dot(s.position), 0.0);
}

TEST(Catalog, EnneperAtOrigin) {
  const ParametricPatch e = enneper();
  EXPECT_LT(e.eval(vec({0, 0})).norm(), 1e-15);
  EXPECT_LE(mean_curvature_norm(e, vec({0, 0}), default_curvature_step(e)), 1e-6);
}

TEST(Catalog, ComplexParabolaInR4) {
  const ParametricPatch cp = complex_parabola();
  EXPECT_EQ(cp.n(), 4);
  EXPECT_LT((cp.eval(vec({1, 0})) - vec({1, 0, 1, 0})).norm(), 1e-15);
  EXPECT_LE(mean_curvature_norm(cp, vec({0.9, 0}), default_curvature_step(cp)), 1e-6);
}

TEST(CatalogProperty, EverySurfaceIsMinimalOnGrid) {
  const ParametricPatch patches[] = {disk_at_1_5(), catenoid(1.0), catenoid(0.6), helicoid(0.5),
                                     enneper(),     complex_parabola()};
  for (const ParametricPatch& p : patches) EXPECT_LE(max_mean_curvature(p, 10), 1e-6) << p.name();
  EXPECT_GT(max_mean_curvature(round_sphere(1.0), 10), 1.0);
}

TEST(CatalogProperty, TransformedPatchKeepsMinimalityAndArea) {
  const Frame q = frame_of({vec({0.8, 0.6, 0}), vec({-0.36, 0.48, 0.8}), vec({0.48, -0.64, 0.6})});
  const Isometry move(q.vectors(), vec({1, 2, 3}));
  const ParametricPatch e = enneper();
  const ParametricPatch moved = e.transformed(move);
  const VecN u = vec({0.2, -0.5});
  EXPECT_LT((moved.eval(u) - move.apply(e.eval(u))).norm(), 1e-14);
  EXPECT_NEAR(sample(moved, u).area_element, sample(e, u).area_element, 1e-13);
  EXPECT_LE(max_mean_curvature(moved, 6), 1e-6);
}

TEST(Catalog, InvalidParameters) {
  EXPECT_THROW(catenoid(0.0), Error);
  EXPECT_THROW(helicoid(0.0), Error);
  EXPECT_THROW(round_sphere(-1.0), Error);
  EXPECT_THROW(flat_disk(vec({0, 0, 0}), frame_of({vec({1, 0, 0})}), -1.0), Error);
}
