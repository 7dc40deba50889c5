#ifndef PNS_TESTS_SUPPORT_HPP
#define PNS_TESTS_SUPPORT_HPP

#include "pns/nested_spheres.hpp"
#include "pns/simulate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace pns::testing {

inline constexpr double kPi = std::numbers::pi;

/// n points on A(v, r) in S^m with angular noise `sd` about the subsphere.
inline Eigen::MatrixXd points_near_subsphere(Rng& rng, const Subsphere& s, int n, double sd,
                                             double spread = kPi) {
  const Eigen::Index m = s.axis.size() - 1;
  Eigen::MatrixXd out(n, m + 1);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd y(m);
    if (m == 1) {
      y(0) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    } else if (spread >= kPi) {
      y = rng.unit_vector(m);
    } else {
      // Points within `spread` of e_1 on S^{m-1}.
      Eigen::VectorXd t = Eigen::VectorXd::Zero(m);
      for (Eigen::Index j = 1; j < m; ++j) t(j) = rng.normal();
      t = t.normalized() * spread * rng.uniform();
      y = exp_map(Eigen::VectorXd::Unit(m, 0), t);
    }
    const Eigen::VectorXd on = inverse_transform(y, s);
    const double delta = sd * rng.normal();
    // Push along the geodesic from v through the point.
    const double rho = s.angle + delta;
    Eigen::VectorXd dir = on - std::cos(s.angle) * s.axis;
    dir.normalize();
    out.row(i) = (std::cos(rho) * s.axis + std::sin(rho) * dir).normalized().transpose();
  }
  return out;
}

/// A cloud of n points around a random centre on S^d with tangent sd `spread`.
inline Eigen::MatrixXd random_cloud(Rng& rng, int d, int n, double spread) {
  const Eigen::VectorXd centre = rng.unit_vector(d + 1);
  const Eigen::MatrixXd basis = tangent_basis(centre);
  Eigen::MatrixXd out(n, d + 1);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z(j) = spread * rng.normal();
    out.row(i) = exp_map(centre, basis * z).transpose();
  }
  return out;
}

inline Eigen::MatrixXd uniform_sphere(Rng& rng, int d, int n) {
  Eigen::MatrixXd out(n, d + 1);
  for (int i = 0; i < n; ++i) out.row(i) = rng.unit_vector(d + 1).transpose();
  return out;
}

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace pns::testing

#endif  // PNS_TESTS_SUPPORT_HPP
