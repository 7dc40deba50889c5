#ifndef PNS_FAST_PNS_HPP
#define PNS_FAST_PNS_HPP

// PCA-reduced PNS for high-dimensional spheres.
//
// The data are summarized by the normalized arithmetic mean X and the top p
// principal directions V_1..V_p of the tangent residuals T_i = X_i - (X . X_i) X.
// Each point is mapped through the log map at X, projected onto span{V_j},
// and sent back with the exp map, giving a point on the p-sphere with
// coordinates in the frame [X, V_1, ..., V_p]. PNS then runs on S^p.

#include "pns/nested_spheres.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace pns {

struct FastPnsBasis {
  Eigen::VectorXd mean;             // X, unit norm
  Eigen::VectorXd arithmetic_mean;  // X^A, before normalization
  Eigen::MatrixXd loadings;         // (d+1) x p, orthonormal columns orthogonal to mean
  Eigen::VectorXd eigenvalues;      // non-increasing, > 0
  double pct_variance = 0.0;
  std::vector<std::string> warnings;

  [[nodiscard]] int p() const { return static_cast<int>(loadings.cols()); }
  /// [X, V_1, ..., V_p]
  [[nodiscard]] Eigen::MatrixXd frame() const;
};

struct ReducedPoint {
  Eigen::VectorXd coords;  // length p + 1, unit norm
  bool degenerate = false;  // zero tangent projection
  bool antipodal = false;   // point opposite the mean
};

/// p = nullopt picks the smallest p reaching 95% of tangent variance, at most 30.
FastPnsBasis build_basis(const Eigen::MatrixXd& data, std::optional<int> p = std::nullopt);

/// Tangent coordinates lambda_j = <W, V_j> of x, with W the log map at the mean.
Eigen::VectorXd tangent_coordinates(const Eigen::VectorXd& x, const FastPnsBasis& basis);

ReducedPoint project_reduced(const Eigen::VectorXd& x, const FastPnsBasis& basis);
Eigen::MatrixXd project_reduced_rows(const Eigen::MatrixXd& data, const FastPnsBasis& basis);

/// G_1 X + sum_j G_{j+1} V_j
Eigen::VectorXd lift_exact(const Eigen::VectorXd& g, const FastPnsBasis& basis);
/// X + (s / sin s) sum_j G_{j+1} V_j with s = acos(G_1); a tangent-space point.
Eigen::VectorXd lift_tangent(const Eigen::VectorXd& g, const FastPnsBasis& basis);
/// normalize(X^A + sum_j G_{j+1} V_j)
Eigen::VectorXd lift_extrinsic(const Eigen::VectorXd& g, const FastPnsBasis& basis);

struct FastPnsResult {
  FastPnsBasis basis;
  PnsFit fit;
  Eigen::MatrixXd reduced;                // n x (p+1)
  Eigen::VectorXd projection_residuals;   // |X_i - lift_exact(project(X_i))|
};

FastPnsResult fast_pns(const Eigen::MatrixXd& data, std::optional<int> p,
                       const PnsOptions& opts = {});

}  // namespace pns

#endif  // PNS_FAST_PNS_HPP
