#ifndef PNS_SUBSPHERE_FIT_HPP
#define PNS_SUBSPHERE_FIT_HPP

#include "pns/sphere_geom.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace pns {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SubsphereFit {
  Subsphere subsphere;
  Eigen::VectorXd residuals;  // acos(x_i . v) - r
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;
  bool radius_floored = false;
};

struct FitOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-12;
  double step_tolerance = 1e-10;
  double min_angle = 1e-6;
};

/// Signed residuals acos(x_i . v) - r for the rows of `data`.
Eigen::VectorXd subsphere_residuals(const Eigen::MatrixXd& data, const Subsphere& s);

/// Least-squares great subsphere (r = pi/2) to the rows of `data` (n x (m+1)).
/// The axis is sign-canonicalized: first nonzero coordinate positive.
SubsphereFit fit_great(const Eigen::MatrixXd& data, const FitOptions& opts = {});

/// Least-squares small subsphere with r profiled out as mean acos(x_i . v).
/// The result is oriented so that r <= pi/2. The great fit of the same data is
/// used as one of the starting points, so rss never exceeds the great rss.
SubsphereFit fit_small(const Eigen::MatrixXd& data, const FitOptions& opts = {});
SubsphereFit fit_small(const Eigen::MatrixXd& data, const SubsphereFit& great,
                       const FitOptions& opts = {});

/// True when every row coincides with the first one to within `tol` radians.
bool all_points_equal(const Eigen::MatrixXd& data, double tol = 1e-12);

}  // namespace pns

#endif  // PNS_SUBSPHERE_FIT_HPP
