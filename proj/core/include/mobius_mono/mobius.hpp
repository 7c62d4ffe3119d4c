#pragma once

// Moebius transformations of the compactified space, stored as words of
// reflections in spheres and hyperplanes.

#include <optional>
#include <variant>
#include <vector>

#include "mobius_mono/geom.hpp"

namespace mobius_mono {

using Reflection = std::variant<Sphere, Hyperplane>;

int dim(const Reflection& refl);

/// Inversion in a sphere (b and infinity swap) or mirror in a hyperplane.
ExtendedPoint reflect(const Reflection& refl, const ExtendedPoint& x);
VecN reflect_finite(const Sphere& s, const VecN& x);

/// Isometric-sphere factorization phi = psi o sigma, sigma the inversion in S(b, R).
struct Decomposition {
  VecN b;          // phi^{-1}(infinity)
  double R;        // isometric-sphere radius
  Isometry psi;
  VecN a;          // sigma(0)
  VecN direction;  // phi(infinity) - phi(a) = psi(b) - psi(0)

  Sphere isometric_sphere() const { return Sphere(b, R); }
  /// phi(0) = psi(a)
  VecN phi_of_origin() const { return psi.apply(a); }
  /// phi(x) = psi(sigma(x))
  ExtendedPoint apply(const ExtendedPoint& x) const;
  /// phi^{-1}(x) = sigma(psi^{-1}(x))
  ExtendedPoint apply_inverse(const ExtendedPoint& x) const;
};

class MobiusMap {
 public:
  /// `word` is applied right to left: word.back() acts first.
  explicit MobiusMap(std::vector<Reflection> word);

  const std::vector<Reflection>& word() const noexcept { return word_; }
  int dim() const noexcept { return dim_; }
  /// Cached isometric-sphere factorization; empty when the map fixes
  /// infinity, sends the origin to infinity, or fails validation.
  const std::optional<Decomposition>& decomposition() const noexcept { return decomposition_; }

 private:
  std::vector<Reflection> word_;
  int dim_;
  std::optional<Decomposition> decomposition_;
};

ExtendedPoint apply(const MobiusMap& map, const ExtendedPoint& x);
MobiusMap inverse(const MobiusMap& map);

/// Local metric scaling |d phi| at x, the product of R^2 / |y - b|^2 over the
/// sphere reflections along the orbit of x. Throws PoleEncountered (with the
/// word index) when a prefix sends x to infinity.
double conformal_factor(const MobiusMap& map, const VecN& x);

/// Probe-point reconstruction of (b, R, psi). Throws FixesInfinity,
/// OriginIsPole or ValidationFailed.
Decomposition isometric_decomposition(const MobiusMap& map);

/// Image of the origin-centered sphere S_r under inversion in S(b, R).
std::variant<Sphere, Hyperplane> ball_image_reflection(const VecN& b, double R, double r);

/// phi(B_r) for 0 < r <= |b|: a ball, or a half-space when r = |b|.
std::variant<Ball, HalfSpace> ball_image(const Decomposition& dec, double r);

/// Inversion in S(a*, sqrt(|a*|^2 - 1)), a* = a / |a|^2; requires 0 < |a| < 1.
MobiusMap make_sigma_a(const VecN& a);

/// Ball automorphism exchanging 0 and a, as a reflection word; requires |a| < 1.
/// Cross-checked against phi_a_closed_form at construction.
MobiusMap make_phi_a(const VecN& a);

/// (|x - a|^2 a - (1 - |a|^2)(x - a)) / (1 - 2<a, x> + |a|^2 |x|^2)
ExtendedPoint phi_a_closed_form(const VecN& a, const ExtendedPoint& x);

}  // namespace mobius_mono
