#ifndef PNS_NESTED_SPHERES_HPP
#define PNS_NESTED_SPHERES_HPP

// Backward fitting of principal nested spheres on S^d.
//
// Level k = 1..d-1 fits a subsphere A(v_k, r_k) of the current sphere
// S^{d+1-k}, projects the data onto it and maps it to S^{d-k}. The last level
// takes the circular Frechet mean on S^1.
//
// Residuals and scores are stored with column j (0-based) holding component
// j+1: column 0 is the circular PNS1 score from S^1, column d-1 is the
// residual of level 1 on the original sphere.

#include "pns/model_select.hpp"
#include "pns/sphere_geom.hpp"
#include "pns/subsphere_fit.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace pns {

struct LevelChoice {
  bool small = false;
  std::optional<LevelTestResult> test;
  double rss_great = 0.0;
  std::optional<double> rss_small;
  bool converged = true;
  bool degenerate = false;
};

struct NestedSphereModel {
  int ambient_dim = 0;  // d, data live on S^d in R^{d+1}
  SelectionMode mode = SelectionMode::small;
  double alpha = 0.05;
  std::vector<Subsphere> subspheres;  // level k at index k-1, axis length d+2-k
  double final_mean = 0.0;
  Eigen::VectorXd pns_mean;
  Eigen::VectorXd cumulative_radii;  // a_1..a_d, a_d = 1
  std::vector<LevelChoice> level_choices;
  bool truncated = false;
  int truncated_level = 0;
  std::vector<std::string> warnings;

  /// r of the subsphere that produced component `component` (2..d).
  [[nodiscard]] const Subsphere& subsphere_for_component(int component) const {
    return subspheres.at(static_cast<std::size_t>(ambient_dim - component));
  }
};

struct PnsFit {
  NestedSphereModel model;
  Eigen::MatrixXd scores;     // n x d, s_k = a_k xi_k
  Eigen::MatrixXd residuals;  // n x d, xi_k
};

class PnsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PnsOptions {
  SelectionMode mode = SelectionMode::small;
  double alpha = 0.05;
  FitOptions fit;
};

/// Rows of `data` are points on S^d (unit norm within 1e-8).
PnsFit fit_pns(const Eigen::MatrixXd& data, const PnsOptions& opts = {});

/// a_k = prod_{i=1}^{d-k} sin r_i for k = 1..d.
Eigen::VectorXd cumulative_radii(const std::vector<Subsphere>& subspheres, int d);

/// The residual cascade xi(x) (same layout as a score vector).
Eigen::VectorXd residual_map(const Eigen::VectorXd& x, const NestedSphereModel& model);

/// h(x): PNS scores of one point.
Eigen::VectorXd score_map(const Eigen::VectorXd& x, const NestedSphereModel& model);
Eigen::MatrixXd score_map_rows(const Eigen::MatrixXd& data, const NestedSphereModel& model);

/// h^{-1}(s). Throws PnsError when a score lies outside its valid interval:
/// s_1 / a_1 in (-pi, pi], s_k / a_k in (-r, pi - r] for k >= 2.
Eigen::VectorXd inverse_score_map(const Eigen::VectorXd& scores,
                                  const NestedSphereModel& model);

/// Closed interval of admissible values for score component `component`
/// (1-based) of `model`.
std::pair<double, double> score_interval(const NestedSphereModel& model, int component);

/// 100 V_k / sum_j V_j with V_k the mean squared score of column k.
Eigen::VectorXd variance_explained(const Eigen::MatrixXd& scores);

/// Dimension of the PNS parameter space with all levels small: d(d+3)/2 - 1.
long parameter_count(int d);

/// Free parameters of a fitted model: axis dimensions plus one radius per
/// small level.
long free_parameter_count(const NestedSphereModel& model);

}  // namespace pns

#endif  // PNS_NESTED_SPHERES_HPP
