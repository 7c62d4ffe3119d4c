#pragma once

// Dimension-generic Euclidean primitives. The ambient dimension is a runtime
// value bounded by kMaxDim so vectors and small matrices live on the stack.

#include <Eigen/Core>

#include <span>
#include <vector>

#include "mobius_mono/error.hpp"

namespace mobius_mono {

inline constexpr int kMaxDim = 8;

using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                           kMaxDim, kMaxDim>;

/// Checks 2 <= n <= kMaxDim and finite entries.
void require_ambient(const VecN& v, const char* what);

/// A point of R^n or the point at infinity of its one-point compactification.
class ExtendedPoint {
 public:
  static ExtendedPoint infinity() { return ExtendedPoint(); }
  static ExtendedPoint finite(VecN p) { return ExtendedPoint(std::move(p)); }

  ExtendedPoint(VecN p) : point_(std::move(p)), infinite_(false) {}  // NOLINT

  bool is_infinity() const noexcept { return infinite_; }
  bool is_finite() const noexcept { return !infinite_; }

  /// Throws InvalidParameter when called on infinity.
  const VecN& point() const;

 private:
  ExtendedPoint() : infinite_(true) {}

  VecN point_;
  bool infinite_;
};

class Sphere {
 public:
  Sphere(VecN center, double radius);

  const VecN& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  int dim() const noexcept { return static_cast<int>(center_.size()); }

 private:
  VecN center_;
  double radius_;
};

/// { x : <unit_normal, x> = offset }
class Hyperplane {
 public:
  /// `unit_normal` must have norm 1 to within 1e-12.
  Hyperplane(VecN unit_normal, double offset);

  /// Rescales an arbitrary nonzero normal, dividing the offset accordingly.
  static Hyperplane normalized(const VecN& normal, double offset);
  static Hyperplane through(const VecN& point, const VecN& normal);

  const VecN& unit_normal() const noexcept { return normal_; }
  double offset() const noexcept { return offset_; }
  int dim() const noexcept { return static_cast<int>(normal_.size()); }

  double signed_distance(const VecN& x) const { return normal_.dot(x) - offset_; }

 private:
  VecN normal_;
  double offset_;
};

class Ball {
 public:
  Ball(VecN center, double radius);

  const VecN& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  bool contains(const VecN& x) const { return (x - center_).norm() < radius_; }

 private:
  VecN center_;
  double radius_;
};

/// { x : <unit_normal, x> < offset }
class HalfSpace {
 public:
  HalfSpace(VecN unit_normal, double offset);

  const VecN& unit_normal() const noexcept { return normal_; }
  double offset() const noexcept { return offset_; }
  bool contains(const VecN& x) const { return normal_.dot(x) < offset_; }

 private:
  VecN normal_;
  double offset_;
};

/// x -> linear * x + translation with an orthogonal linear part.
class Isometry {
 public:
  Isometry(MatN linear, VecN translation);

  static Isometry identity(int n);
  static Isometry mirror(const Hyperplane& plane);

  const MatN& linear() const noexcept { return linear_; }
  const VecN& translation() const noexcept { return translation_; }
  int dim() const noexcept { return static_cast<int>(translation_.size()); }

  VecN apply(const VecN& x) const { return linear_ * x + translation_; }
  VecN apply_linear(const VecN& v) const { return linear_ * v; }
  VecN apply_inverse(const VecN& y) const { return linear_.transpose() * (y - translation_); }

  Isometry inverse() const;
  /// (*this) o other
  Isometry compose(const Isometry& other) const;

 private:
  MatN linear_;
  VecN translation_;
};

/// Orthonormal basis of a k-dimensional subspace of R^n, stored as columns.
class Frame {
 public:
  /// Columns must be orthonormal to 1e-10.
  explicit Frame(MatN vectors);

  int ambient_dim() const noexcept { return static_cast<int>(vectors_.rows()); }
  int dim() const noexcept { return static_cast<int>(vectors_.cols()); }
  const MatN& vectors() const noexcept { return vectors_; }
  VecN vector(int i) const { return vectors_.col(i); }

 private:
  friend Frame orthonormal_frame(const MatN& columns, double tol);
  struct Unchecked {};
  Frame(MatN vectors, Unchecked) : vectors_(std::move(vectors)) {}

  MatN vectors_;
};

/// Gram-Schmidt with one re-orthogonalization pass. The first vector is
/// oriented so that its first nonzero coordinate is nonnegative.
/// Throws RankDeficient when the smallest singular value is <= tol.
Frame orthonormal_frame(const MatN& columns, double tol = 1e-12);
Frame orthonormal_frame(std::span<const VecN> columns, double tol = 1e-12);

/// Smallest singular value of an n x k matrix with k <= n.
double smallest_singular_value(const MatN& columns);

struct Projection {
  VecN tangential;
  VecN normal;
};

Projection project(const VecN& x, const Frame& frame);

/// Squared norm of the tangential part, without materializing the split.
double tangential_norm2(const VecN& x, const Frame& frame);

struct SphereFit {
  Sphere sphere;
  double residual;  // max | |p - c| - r |
};

/// Algebraic least-squares sphere through m >= n + 2 points.
/// Throws Degenerate when the points lie (numerically) on a hyperplane.
SphereFit fit_sphere(std::span<const VecN> points);

}  // namespace mobius_mono
