#include "mobius_mono/geom.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace mobius_mono {

namespace {

struct GramSchmidt {
  MatN q;
  MatN r;
};

// Two-pass modified Gram-Schmidt. Columns that vanish after projection are
// left as zero vectors with r(j,j) = 0 so callers can detect rank loss.
GramSchmidt gram_schmidt(const MatN& a) {
  const auto n = a.rows();
  const auto k = a.cols();
  GramSchmidt gs{MatN::Zero(n, k), MatN::Zero(k, k)};
  for (Eigen::Index j = 0; j < k; ++j) {
    VecN v = a.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = gs.q.col(i).dot(v);
        gs.r(i, j) += c;
        v -= c * gs.q.col(i);
      }
    }
    const double norm = v.norm();
    gs.r(j, j) = norm;
    if (norm > 0.0) gs.q.col(j) = v / norm;
  }
  return gs;
}

double smallest_singular_value_upper(const MatN& r) {
  const auto k = r.cols();
  if (k == 1) return std::abs(r(0, 0));
  if (k == 2) {
    const double det = std::abs(r(0, 0) * r(1, 1));
    const double fro2 = r.squaredNorm();
    const double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det));
    const double smax = std::sqrt(0.5 * (fro2 + disc));
    return smax > 0.0 ? det / smax : 0.0;
  }
  Eigen::JacobiSVD<MatN> svd(r);
  return svd.singularValues()(k - 1);
}

}  // namespace

void require_ambient(const VecN& v, const char* what) {
  if (v.size() < 2 || v.size() > kMaxDim) {
    throw Error(ErrorCode::InvalidParameter,
                std::string(what) + ": ambient dimension must be in [2, " +
                    std::to_string(kMaxDim) + "], got " + std::to_string(v.size()));
  }
  if (!v.allFinite()) {
    throw Error(ErrorCode::InvalidParameter, std::string(what) + ": non-finite coordinate");
  }
}

const VecN& ExtendedPoint::point() const {
  if (infinite_) throw Error(ErrorCode::InvalidParameter, "point at infinity has no coordinates");
  return point_;
}

Sphere::Sphere(VecN center, double radius) : center_(std::move(center)), radius_(radius) {
  require_ambient(center_, "Sphere center");
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    throw Error(ErrorCode::InvalidParameter, "Sphere radius must be positive and finite");
  }
}

Hyperplane::Hyperplane(VecN unit_normal, double offset)
    : normal_(std::move(unit_normal)), offset_(offset) {
  require_ambient(normal_, "Hyperplane normal");
  if (std::abs(normal_.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidParameter, "Hyperplane normal must be a unit vector");
  }
  if (!std::isfinite(offset_)) throw Error(ErrorCode::InvalidParameter, "Hyperplane offset");
}

Hyperplane Hyperplane::normalized(const VecN& normal, double offset) {
  const double len = normal.norm();
  if (!(len > 0.0)) throw Error(ErrorCode::InvalidParameter, "Hyperplane normal is zero");
  return Hyperplane(normal / len, offset / len);
}

Hyperplane Hyperplane::through(const VecN& point, const VecN& normal) {
  const double len = normal.norm();
  if (!(len > 0.0)) throw Error(ErrorCode::InvalidParameter, "Hyperplane normal is zero");
  VecN unit = normal / len;
  const double offset = unit.dot(point);
  return Hyperplane(std::move(unit), offset);
}

Ball::Ball(VecN center, double radius) : center_(std::move(center)), radius_(radius) {
  require_ambient(center_, "Ball center");
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    throw Error(ErrorCode::InvalidParameter, "Ball radius must be positive and finite");
  }
}

HalfSpace::HalfSpace(VecN unit_normal, double offset)
    : normal_(std::move(unit_normal)), offset_(offset) {
  require_ambient(normal_, "HalfSpace normal");
  if (std::abs(normal_.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidParameter, "HalfSpace normal must be a unit vector");
  }
}

Isometry::Isometry(MatN linear, VecN translation)
    : linear_(std::move(linear)), translation_(std::move(translation)) {
  require_ambient(translation_, "Isometry translation");
  const auto n = translation_.size();
  if (linear_.rows() != n || linear_.cols() != n) {
    throw Error(ErrorCode::InvalidParameter, "Isometry linear part has wrong shape");
  }
  const MatN gram = linear_.transpose() * linear_;
  if ((gram - MatN::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::InvalidParameter, "Isometry linear part is not orthogonal");
  }
}

Isometry Isometry::identity(int n) {
  return Isometry(MatN::Identity(n, n), VecN::Zero(n));
}

Isometry Isometry::mirror(const Hyperplane& plane) {
  const VecN& nu = plane.unit_normal();
  const auto n = nu.size();
  MatN linear = MatN::Identity(n, n) - 2.0 * nu * nu.transpose();
  return Isometry(std::move(linear), 2.0 * plane.offset() * nu);
}

Isometry Isometry::inverse() const {
  MatN lt = linear_.transpose();
  VecN t = -(lt * translation_);
  return Isometry(std::move(lt), std::move(t));
}

Isometry Isometry::compose(const Isometry& other) const {
  return Isometry(linear_ * other.linear_, linear_ * other.translation_ + translation_);
}

Frame::Frame(MatN vectors) : vectors_(std::move(vectors)) {
  if (vectors_.rows() < 2 || vectors_.cols() < 1 || vectors_.cols() > vectors_.rows()) {
    throw Error(ErrorCode::InvalidParameter, "Frame must hold 1 <= k <= n vectors");
  }
  const auto k = vectors_.cols();
  const MatN gram = vectors_.transpose() * vectors_;
  if ((gram - MatN::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::InvalidParameter, "Frame vectors are not orthonormal");
  }
}

double smallest_singular_value(const MatN& columns) {
  return smallest_singular_value_upper(gram_schmidt(columns).r);
}

Frame orthonormal_frame(const MatN& columns, double tol) {
  if (columns.rows() < 2 || columns.cols() < 1 || columns.cols() > columns.rows()) {
    throw Error(ErrorCode::InvalidParameter, "orthonormal_frame needs 1 <= k <= n columns");
  }
  GramSchmidt gs = gram_schmidt(columns);
  const double smin = smallest_singular_value_upper(gs.r);
  if (!(smin > tol)) {
    throw Error(ErrorCode::RankDeficient,
                "smallest singular value " + std::to_string(smin) + " <= " + std::to_string(tol));
  }
  for (Eigen::Index i = 0; i < gs.q.rows(); ++i) {
    const double c = gs.q(i, 0);
    if (std::abs(c) > 1e-14) {
      if (c < 0.0) gs.q.col(0) = -gs.q.col(0);
      break;
    }
  }
  return Frame(std::move(gs.q), Frame::Unchecked{});
}

Frame orthonormal_frame(std::span<const VecN> columns, double tol) {
  if (columns.empty()) throw Error(ErrorCode::InvalidParameter, "no columns");
  const auto n = columns.front().size();
  MatN a(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != n) throw Error(ErrorCode::InvalidParameter, "column size mismatch");
    a.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  return orthonormal_frame(a, tol);
}

Projection project(const VecN& x, const Frame& frame) {
  if (x.size() != frame.ambient_dim()) {
    throw Error(ErrorCode::InvalidParameter, "project: dimension mismatch");
  }
  const MatN& e = frame.vectors();
  VecN tangential = e * (e.transpose() * x);
  VecN normal = x - tangential;
  return {std::move(tangential), std::move(normal)};
}

double tangential_norm2(const VecN& x, const Frame& frame) {
  return (frame.vectors().transpose() * x).squaredNorm();
}

SphereFit fit_sphere(std::span<const VecN> points) {
  if (points.empty()) throw Error(ErrorCode::InvalidParameter, "fit_sphere: no points");
  const auto n = points.front().size();
  const auto m = static_cast<Eigen::Index>(points.size());
  if (m < n + 2) {
    throw Error(ErrorCode::InvalidParameter, "fit_sphere needs at least n + 2 points");
  }

  // Center and scale the cloud so the linear system is well conditioned.
  VecN centroid = VecN::Zero(n);
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(m);
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, (p - centroid).norm());
  if (!(scale > 0.0)) throw Error(ErrorCode::Degenerate, "fit_sphere: coincident points");

  // |q|^2 = 2 <c, q> + (r^2 - |c|^2)
  Eigen::MatrixXd a(m, n + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const VecN q = (points[static_cast<std::size_t>(i)] - centroid) / scale;
    a.row(i).head(n) = 2.0 * q.transpose();
    a(i, n) = 1.0;
    rhs(i) = q.squaredNorm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::Degenerate, "fit_sphere: points lie near a hyperplane");
  }
  const Eigen::VectorXd sol = svd.solve(rhs);
  VecN c = sol.head(n);
  const double r2 = sol(n) + c.squaredNorm();
  if (!(r2 > 0.0)) throw Error(ErrorCode::Degenerate, "fit_sphere: negative squared radius");

  VecN center = centroid + scale * c;
  const double radius = scale * std::sqrt(r2);
  double residual = 0.0;
  for (const auto& p : points) {
    residual = std::max(residual, std::abs((p - center).norm() - radius));
  }
  return {Sphere(std::move(center), radius), residual};
}

}  // namespace mobius_mono
