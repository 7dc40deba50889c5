#ifndef PNS_SPHERE_GEOM_HPP
#define PNS_SPHERE_GEOM_HPP

// Geometry primitives on the unit sphere S^m embedded in R^{m+1}.
//
// Points are plain Eigen column vectors of unit norm. The "pole" of S^m is
// the last standard basis vector e_{m+1}; every subsphere A(v, r) is mapped
// onto a lower sphere by rotating its axis v onto the pole, dropping the last
// coordinate and rescaling by 1 / sin(r).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pns {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a geometric precondition (dimension, unit norm, membership)
/// is violated.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Subsphere A(v, r) = { x in S^m : acos(x . v) = r } with 0 < r <= pi/2.
template <typename Scalar>
struct BasicSubsphere {
  VectorX<Scalar> axis;
  Scalar angle = std::numbers::pi_v<Scalar> / 2;

  [[nodiscard]] Eigen::Index ambient_size() const { return axis.size(); }
  [[nodiscard]] bool is_great(Scalar tol = Scalar(1e-12)) const {
    return std::abs(angle - std::numbers::pi_v<Scalar> / 2) <= tol;
  }
};

using Subsphere = BasicSubsphere<double>;

template <typename Scalar>
inline Scalar clamp_unit(Scalar c) {
  return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
inline Scalar wrap_angle(Scalar a) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  constexpr Scalar two_pi = 2 * pi;
  a = std::fmod(a, two_pi);
  if (a <= -pi) a += two_pi;
  if (a > pi) a -= two_pi;
  return a;
}

template <typename DerivedA, typename DerivedB>
inline void require_same_size(const Eigen::MatrixBase<DerivedA>& a,
                              const Eigen::MatrixBase<DerivedB>& b,
                              const char* what) {
  if (a.size() != b.size()) {
    throw GeometryError(std::string(what) + ": dimension mismatch (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
}

/// Great-circle distance acos(x . y), with the dot product clamped to [-1, 1].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar geodesic_dist(const Eigen::MatrixBase<DerivedA>& x,
                                        const Eigen::MatrixBase<DerivedB>& y) {
  require_same_size(x, y, "geodesic_dist");
  return std::acos(clamp_unit(x.dot(y)));
}

/// Proper rotation R with R v = e_{m+1}.
///
/// R is the Rodrigues rotation in the plane spanned by v and the pole, and the
/// identity on its orthogonal complement. With s = |v_head| = sin(alpha) and
/// c = v_last = cos(alpha), the in-plane unit vector is u = (v_head / s, 0).
/// For v = -pole (s = 0) the plane is fixed to span{e_1, e_{m+1}}.
///
/// Applying R never needs the dense matrix; see RotationToPole::apply.
template <typename Scalar>
class RotationToPole {
 public:
  RotationToPole() = default;

  template <typename Derived>
  explicit RotationToPole(const Eigen::MatrixBase<Derived>& v) {
    const Eigen::Index n = v.size();
    if (n < 2) throw GeometryError("rotation_to_pole: dimension must be >= 2");
    u_ = VectorX<Scalar>::Zero(n);
    const Scalar c = v(n - 1);
    const Scalar s = v.head(n - 1).norm();
    if (s == Scalar(0)) {
      if (c > 0) {
        identity_ = true;
        sin_ = 0;
        cos_minus_one_ = 0;
      } else {
        u_(0) = 1;
        sin_ = 0;
        cos_minus_one_ = -2;
      }
    } else {
      u_.head(n - 1) = v.head(n - 1) / s;
      sin_ = s;
      // cos(alpha) - 1 without cancellation when alpha is small.
      cos_minus_one_ = c > 0 ? -(s * s) / (Scalar(1) + c) : c - Scalar(1);
    }
  }

  [[nodiscard]] Eigen::Index size() const { return u_.size(); }

  /// R x
  template <typename Derived>
  [[nodiscard]] VectorX<Scalar> apply(const Eigen::MatrixBase<Derived>& x) const {
    VectorX<Scalar> y = x;
    if (identity_) return y;
    const Eigen::Index last = u_.size() - 1;
    const Scalar ux = u_.dot(x);
    const Scalar ex = x(last);
    y += cos_minus_one_ * ux * u_;
    y(last) += cos_minus_one_ * ex + sin_ * ux;
    y -= sin_ * ex * u_;
    return y;
  }

  /// R^T y
  template <typename Derived>
  [[nodiscard]] VectorX<Scalar> apply_transpose(
      const Eigen::MatrixBase<Derived>& y) const {
    VectorX<Scalar> x = y;
    if (identity_) return x;
    const Eigen::Index last = u_.size() - 1;
    const Scalar uy = u_.dot(y);
    const Scalar ey = y(last);
    x += cos_minus_one_ * uy * u_;
    x(last) += cos_minus_one_ * ey - sin_ * uy;
    x += sin_ * ey * u_;
    return x;
  }

  [[nodiscard]] MatrixX<Scalar> matrix() const {
    const Eigen::Index n = u_.size();
    MatrixX<Scalar> r(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      r.col(j) = apply(VectorX<Scalar>::Unit(n, j));
    }
    return r;
  }

 private:
  VectorX<Scalar> u_;
  Scalar sin_ = 0;
  Scalar cos_minus_one_ = 0;
  bool identity_ = false;
};

template <typename Derived>
MatrixX<typename Derived::Scalar> rotation_to_pole(
    const Eigen::MatrixBase<Derived>& v) {
  return RotationToPole<typename Derived::Scalar>(v).matrix();
}

/// Orthonormal basis (columns) of the tangent space at v: rows 0..m-1 of R(v).
template <typename Derived>
MatrixX<typename Derived::Scalar> tangent_basis(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = v.size();
  RotationToPole<Scalar> rot(v);
  MatrixX<Scalar> basis(n, n - 1);
  for (Eigen::Index j = 0; j < n - 1; ++j) {
    basis.col(j) = rot.apply_transpose(VectorX<Scalar>::Unit(n, j));
  }
  return basis;
}

/// Exponential map at v applied to a tangent vector t.
template <typename DerivedV, typename DerivedT>
VectorX<typename DerivedV::Scalar> exp_map(const Eigen::MatrixBase<DerivedV>& v,
                                           const Eigen::MatrixBase<DerivedT>& t) {
  using Scalar = typename DerivedV::Scalar;
  const Scalar len = t.norm();
  if (len == Scalar(0)) return v;
  VectorX<Scalar> out = std::cos(len) * v + (std::sin(len) / len) * t;
  out.normalize();
  return out;
}

template <typename Scalar>
struct ProjectionResult {
  VectorX<Scalar> point;
  bool degenerate = false;
};

/// sphere_transform / inverse_transform for A(v, r); these are f and f^{-1}.
template <typename Derived, typename Scalar>
VectorX<Scalar> inverse_transform(const Eigen::MatrixBase<Derived>& y,
                                  const BasicSubsphere<Scalar>& s) {
  if (y.size() + 1 != s.axis.size()) {
    throw GeometryError("inverse_transform: dimension mismatch");
  }
  VectorX<Scalar> lifted(s.axis.size());
  lifted.head(y.size()) = std::sin(s.angle) * y;
  lifted(y.size()) = std::cos(s.angle);
  return RotationToPole<Scalar>(s.axis).apply_transpose(lifted);
}

/// Nearest point of A(v, r) to x. If x = +-v the nearest point is not unique
/// and f^{-1}(e_1) is returned with `degenerate` set.
template <typename Derived, typename Scalar>
ProjectionResult<Scalar> project_to_subsphere(const Eigen::MatrixBase<Derived>& x,
                                              const BasicSubsphere<Scalar>& s) {
  require_same_size(x, s.axis, "project_to_subsphere");
  const Scalar rho = geodesic_dist(x, s.axis);
  const Scalar sin_rho = std::sin(rho);
  if (sin_rho < Scalar(1e-10)) {
    const VectorX<Scalar> e1 = VectorX<Scalar>::Unit(s.axis.size() - 1, 0);
    return {inverse_transform(e1, s), true};
  }
  VectorX<Scalar> p = std::cos(s.angle) * s.axis +
                      (std::sin(s.angle) / sin_rho) * (x - std::cos(rho) * s.axis);
  p.normalize();
  return {std::move(p), false};
}

/// f: A(v, r) -> S^{m-1}. Requires acos(x . v) = r within `tol`.
template <typename Derived, typename Scalar>
VectorX<Scalar> sphere_transform(const Eigen::MatrixBase<Derived>& x,
                                 const BasicSubsphere<Scalar>& s,
                                 Scalar tol = Scalar(1e-8)) {
  require_same_size(x, s.axis, "sphere_transform");
  const Scalar off = std::abs(geodesic_dist(x, s.axis) - s.angle);
  if (off > tol) {
    throw GeometryError("sphere_transform: point is " + std::to_string(off) +
                        " rad off the subsphere");
  }
  const VectorX<Scalar> rotated = RotationToPole<Scalar>(s.axis).apply(x);
  VectorX<Scalar> y = rotated.head(x.size() - 1) / std::sin(s.angle);
  // Normalizing absorbs the O(tol) deviation from the subsphere.
  y.normalize();
  return y;
}

/// Circular Frechet mean: minimizer over v of sum_i d(theta_i, v)^2 with d the
/// arc distance on S^1.
///
/// Any minimizer satisfies sum_i wrap(theta_i - v) = 0, so it is one of the
/// n shifts mean(theta) + 2 pi k / n; the arithmetic means of the data
/// unwrapped around each observation are added as further candidates. The
/// candidate with the smallest objective wins; near-ties go to the smallest
/// angle in (-pi, pi].
template <typename Scalar>
Scalar frechet_mean_circle(std::span<const Scalar> angles) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (angles.empty()) throw std::invalid_argument("frechet_mean_circle: empty input");
  const auto n = static_cast<Scalar>(angles.size());

  auto objective = [&](Scalar v) {
    Scalar sum = 0;
    for (Scalar a : angles) {
      const Scalar d = wrap_angle(a - v);
      sum += d * d;
    }
    return sum;
  };

  std::vector<Scalar> candidates;
  candidates.reserve(2 * angles.size());
  Scalar total = 0;
  for (Scalar a : angles) total += a;
  const Scalar mean = total / n;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    candidates.push_back(wrap_angle(mean + 2 * pi * static_cast<Scalar>(k) / n));
  }
  for (Scalar centre : angles) {
    Scalar acc = 0;
    for (Scalar a : angles) acc += centre + wrap_angle(a - centre);
    candidates.push_back(wrap_angle(acc / n));
  }

  Scalar best = candidates.front();
  Scalar best_obj = objective(best);
  for (Scalar c : candidates) {
    const Scalar obj = objective(c);
    const Scalar tie_tol = Scalar(1e-12) * std::max(Scalar(1), best_obj);
    if (obj < best_obj - tie_tol || (std::abs(obj - best_obj) <= tie_tol && c < best)) {
      if (obj < best_obj) best_obj = obj;
      best = c;
    }
  }
  return best;
}

template <typename Scalar>
Scalar frechet_mean_circle(const std::vector<Scalar>& angles) {
  return frechet_mean_circle(std::span<const Scalar>(angles));
}

}  // namespace pns

#endif  // PNS_SPHERE_GEOM_HPP
