#include "mobius_mono/mobius.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace mobius_mono {

namespace {

constexpr std::array<int, kMaxDim> kHaltonPrimes = {2, 3, 5, 7, 11, 13, 17, 19};
constexpr int kProbeCount = 32;

double radical_inverse(int index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

// Deterministic Halton probes in the cube [-|b|, |b|]^n, excluding a
// |b| * 1e-3 neighbourhood of the pole b.
std::vector<VecN> probe_points(const VecN& b) {
  const auto n = b.size();
  const double scale = b.norm();
  std::vector<VecN> probes;
  for (int i = 1; static_cast<int>(probes.size()) < kProbeCount; ++i) {
    VecN p(n);
    for (Eigen::Index d = 0; d < n; ++d) {
      p(d) = scale * (2.0 * radical_inverse(i, kHaltonPrimes[static_cast<std::size_t>(d)]) - 1.0);
    }
    if ((p - b).norm() > 1e-3 * scale) probes.push_back(std::move(p));
  }
  return probes;
}

double relative_gap(double x, double y) {
  return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
}

}  // namespace

int dim(const Reflection& refl) {
  return std::visit([](const auto& s) { return s.dim(); }, refl);
}

VecN reflect_finite(const Sphere& s, const VecN& x) {
  const VecN d = x - s.center();
  return s.center() + (s.radius() * s.radius() / d.squaredNorm()) * d;
}

ExtendedPoint reflect(const Reflection& refl, const ExtendedPoint& x) {
  if (const auto* sphere = std::get_if<Sphere>(&refl)) {
    if (x.is_infinity()) return ExtendedPoint::finite(sphere->center());
    const VecN d = x.point() - sphere->center();
    const double d2 = d.squaredNorm();
    if (d2 == 0.0) return ExtendedPoint::infinity();
    return ExtendedPoint::finite(sphere->center() + (sphere->radius() * sphere->radius() / d2) * d);
  }
  const auto& plane = std::get<Hyperplane>(refl);
  if (x.is_infinity()) return x;
  return ExtendedPoint::finite(x.point() - 2.0 * plane.signed_distance(x.point()) * plane.unit_normal());
}

ExtendedPoint Decomposition::apply(const ExtendedPoint& x) const {
  const ExtendedPoint y = reflect(isometric_sphere(), x);
  if (y.is_infinity()) return y;
  return ExtendedPoint::finite(psi.apply(y.point()));
}

ExtendedPoint Decomposition::apply_inverse(const ExtendedPoint& x) const {
  if (x.is_infinity()) return ExtendedPoint::finite(b);
  return reflect(isometric_sphere(), ExtendedPoint::finite(psi.apply_inverse(x.point())));
}

MobiusMap::MobiusMap(std::vector<Reflection> word) : word_(std::move(word)), dim_(0) {
  if (word_.empty()) throw Error(ErrorCode::InvalidParameter, "Moebius word must be nonempty");
  dim_ = mobius_mono::dim(word_.front());
  for (const auto& r : word_) {
    if (mobius_mono::dim(r) != dim_) {
      throw Error(ErrorCode::InvalidParameter, "Moebius word mixes ambient dimensions");
    }
  }
  try {
    decomposition_ = isometric_decomposition(*this);
  } catch (const Error&) {
    decomposition_.reset();
  }
}

ExtendedPoint apply(const MobiusMap& map, const ExtendedPoint& x) {
  ExtendedPoint y = x;
  const auto& word = map.word();
  for (auto it = word.rbegin(); it != word.rend(); ++it) y = reflect(*it, y);
  return y;
}

MobiusMap inverse(const MobiusMap& map) {
  std::vector<Reflection> word(map.word().rbegin(), map.word().rend());
  return MobiusMap(std::move(word));
}

double conformal_factor(const MobiusMap& map, const VecN& x) {
  const auto& word = map.word();
  VecN y = x;
  double factor = 1.0;
  for (std::size_t step = word.size(); step-- > 0;) {
    if (const auto* sphere = std::get_if<Sphere>(&word[step])) {
      const VecN d = y - sphere->center();
      const double d2 = d.squaredNorm();
      if (d2 == 0.0) {
        throw Error(ErrorCode::PoleEncountered,
                    "orbit hits the center of reflection " + std::to_string(step), step);
      }
      const double r2 = sphere->radius() * sphere->radius();
      factor *= r2 / d2;
      y = sphere->center() + (r2 / d2) * d;
    } else {
      const auto& plane = std::get<Hyperplane>(word[step]);
      y -= 2.0 * plane.signed_distance(y) * plane.unit_normal();
    }
  }
  return factor;
}

Decomposition isometric_decomposition(const MobiusMap& map) {
  const ExtendedPoint image_of_infinity = apply(map, ExtendedPoint::infinity());
  if (image_of_infinity.is_infinity()) {
    throw Error(ErrorCode::FixesInfinity, "map fixes infinity (Euclidean similarity)");
  }
  // Evaluate phi^{-1}(infinity) directly on the reversed word.
  ExtendedPoint pole = ExtendedPoint::infinity();
  for (const auto& r : map.word()) pole = reflect(r, pole);
  if (pole.is_infinity()) {
    throw Error(ErrorCode::ValidationFailed, "inverse word fixes infinity but forward does not");
  }
  const VecN b = pole.point();
  const double bn = b.norm();
  if (bn < 1e-12) throw Error(ErrorCode::OriginIsPole, "origin is the pole of the map");

  const std::vector<VecN> probes = probe_points(b);

  // R^2 = |x0 - b|^2 * conformal factor, consistent across probes.
  double radius = -1.0;
  for (const auto& p : probes) {
    double lambda = 0.0;
    try {
      lambda = conformal_factor(map, p);
    } catch (const Error&) {
      continue;
    }
    const double r = (p - b).norm() * std::sqrt(lambda);
    if (radius < 0.0) {
      radius = r;
    } else if (relative_gap(r, radius) > 1e-8) {
      throw Error(ErrorCode::ValidationFailed, "isometric-sphere radius is not consistent across probes");
    }
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::ValidationFailed, "could not determine isometric-sphere radius");
  }
  const Sphere sigma(b, radius);

  // psi = phi o sigma, recovered by orthogonal Procrustes on probe images.
  const auto n = b.size();
  std::vector<VecN> src;
  std::vector<VecN> dst;
  for (const auto& y : probes) {
    const ExtendedPoint z = apply(map, reflect(sigma, ExtendedPoint::finite(y)));
    if (z.is_infinity()) continue;
    src.push_back(y);
    dst.push_back(z.point());
  }
  if (static_cast<Eigen::Index>(src.size()) < n + 1) {
    throw Error(ErrorCode::ValidationFailed, "too few usable probe points");
  }
  VecN src_mean = VecN::Zero(n);
  VecN dst_mean = VecN::Zero(n);
  for (std::size_t i = 0; i < src.size(); ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= static_cast<double>(src.size());
  dst_mean /= static_cast<double>(dst.size());
  MatN cross = MatN::Zero(n, n);
  for (std::size_t i = 0; i < src.size(); ++i) {
    cross += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();
  }
  Eigen::JacobiSVD<MatN> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatN linear = svd.matrixV() * svd.matrixU().transpose();
  const VecN translation = dst_mean - linear * src_mean;
  Isometry psi(linear, translation);

  double worst = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    worst = std::max(worst, (psi.apply(src[i]) - dst[i]).norm() / (1.0 + dst[i].norm()));
  }
  for (std::size_t i = 0; i + 1 < src.size(); ++i) {
    const double before = (src[i] - src[i + 1]).norm();
    const double after = (dst[i] - dst[i + 1]).norm();
    worst = std::max(worst, std::abs(before - after) / (1.0 + before));
  }
  if (worst > 1e-8) {
    throw Error(ErrorCode::ValidationFailed,
                "phi o sigma is not an isometry (distortion " + std::to_string(worst) + ")");
  }

  VecN a = ((bn * bn - radius * radius) / (bn * bn)) * b;
  VecN direction = psi.apply_linear(b);
  return Decomposition{b, radius, std::move(psi), std::move(a), std::move(direction)};
}

std::variant<Sphere, Hyperplane> ball_image_reflection(const VecN& b, double R, double r) {
  require_ambient(b, "ball_image_reflection b");
  const double b2 = b.squaredNorm();
  const double bn = std::sqrt(b2);
  if (!(bn > 0.0)) throw Error(ErrorCode::OriginIsPole, "b must be nonzero");
  if (!(R > 0.0) || !(r > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "ball_image_reflection needs R > 0 and r > 0");
  }
  if (std::abs(r - bn) <= 1e-12 * bn) {
    // { 2|b|^2 - R^2 - 2<b, x> = 0 }
    return Hyperplane(b / bn, (2.0 * b2 - R * R) / (2.0 * bn));
  }
  const double denom = b2 - r * r;
  VecN center = ((b2 - R * R - r * r) / denom) * b;
  return Sphere(std::move(center), R * R * r / std::abs(denom));
}

std::variant<Ball, HalfSpace> ball_image(const Decomposition& dec, double r) {
  const double bn = dec.b.norm();
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidParameter, "ball_image needs r > 0");
  if (r > bn * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidParameter,
                "ball_image: for r > |b| the image is the exterior of a ball");
  }
  const auto image = ball_image_reflection(dec.b, dec.R, r);
  if (const auto* s = std::get_if<Sphere>(&image)) {
    return Ball(dec.psi.apply(s->center()), s->radius());
  }
  // The half-space side containing sigma(0) = a.
  const auto& plane = std::get<Hyperplane>(image);
  VecN normal = dec.psi.apply_linear(plane.unit_normal());
  const double offset = plane.offset() + normal.dot(dec.psi.translation());
  return HalfSpace(std::move(normal), offset);
}

MobiusMap make_sigma_a(const VecN& a) {
  require_ambient(a, "sigma_a");
  const double an = a.norm();
  if (!(an < 1.0)) throw Error(ErrorCode::InvalidPrescribedPoint, "sigma_a requires |a| < 1");
  if (!(an > 0.0)) throw Error(ErrorCode::InvalidPrescribedPoint, "sigma_a requires a != 0");
  const VecN a_star = a / (an * an);
  const double radius = std::sqrt(a_star.squaredNorm() - 1.0);
  return MobiusMap({Sphere(a_star, radius)});
}

ExtendedPoint phi_a_closed_form(const VecN& a, const ExtendedPoint& x) {
  const double a2 = a.squaredNorm();
  if (x.is_infinity()) {
    if (a2 == 0.0) return x;
    return ExtendedPoint::finite(a / a2);
  }
  const VecN& p = x.point();
  const double denom = 1.0 - 2.0 * a.dot(p) + a2 * p.squaredNorm();
  if (denom == 0.0) return ExtendedPoint::infinity();
  const VecN d = p - a;
  return ExtendedPoint::finite((d.squaredNorm() * a - (1.0 - a2) * d) / denom);
}

MobiusMap make_phi_a(const VecN& a) {
  require_ambient(a, "phi_a");
  const double a2 = a.squaredNorm();
  if (!(a2 < 1.0)) throw Error(ErrorCode::InvalidPrescribedPoint, "phi_a requires |a| < 1");
  const auto n = a.size();

  // phi_a = inv_{S(0,1)} o (point reflection through a) o inv_{S(a, sqrt(1 - |a|^2))};
  // the point reflection is the product of n coordinate mirrors through a.
  std::vector<Reflection> word;
  word.emplace_back(Sphere(VecN::Zero(n), 1.0));
  for (Eigen::Index i = 0; i < n; ++i) {
    word.emplace_back(Hyperplane(VecN::Unit(n, i), a(i)));
  }
  word.emplace_back(Sphere(a, std::sqrt(1.0 - a2)));
  MobiusMap map(std::move(word));

  for (int i = 1; i <= kProbeCount; ++i) {
    VecN p(n);
    for (Eigen::Index d = 0; d < n; ++d) {
      p(d) = 2.0 * radical_inverse(i, kHaltonPrimes[static_cast<std::size_t>(d)]) - 1.0;
    }
    const ExtendedPoint w = apply(map, ExtendedPoint::finite(p));
    const ExtendedPoint c = phi_a_closed_form(a, ExtendedPoint::finite(p));
    if (w.is_infinity() != c.is_infinity()) {
      throw Error(ErrorCode::ValidationFailed, "phi_a word and closed form disagree at a pole");
    }
    if (w.is_finite() && (w.point() - c.point()).norm() > 1e-10 * (1.0 + c.point().norm())) {
      throw Error(ErrorCode::ValidationFailed, "phi_a word and closed form disagree");
    }
  }
  return map;
}

}  // namespace mobius_mono
