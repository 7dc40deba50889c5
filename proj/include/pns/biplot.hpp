#ifndef PNS_BIPLOT_HPP
#define PNS_BIPLOT_HPP

// PNS biplot: sweep PNS1 (x direction) and PNS2 (y direction) over +-2
// standard deviations with all other scores zero, map back to the original
// variables and subtract the PNS mean. Each original variable gives one
// planar curve through the origin.

#include "pns/fast_pns.hpp"
#include "pns/nested_spheres.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pns {

struct BiplotPath {
  int variable_index = 0;
  std::vector<double> lambda_grid;  // sweep position in standard deviations, -2..2
  std::vector<double> x_path;
  std::vector<double> y_path;
  double path_length = 0.0;
};

struct BiplotResult {
  std::vector<BiplotPath> paths;
  double sd_x = 0.0;
  double sd_y = 0.0;
  int component_x = 1;
  int component_y = 2;
  bool clipped = false;
};

struct BiplotOptions {
  int grid_points = 41;
  int component_x = 1;
  int component_y = 2;
};

/// Back-fitted variable paths. With a basis, points are lifted to the original
/// variables by lift_exact before subtracting the lifted PNS mean.
BiplotResult backfit_paths(const NestedSphereModel& model, const Eigen::MatrixXd& scores,
                           const FastPnsBasis* basis = nullptr,
                           const BiplotOptions& opts = {});

/// Indices of the k longest paths, longest first; ties go to the lower index.
std::vector<int> rank_variables(const std::vector<BiplotPath>& paths, int k);

struct BiplotDocuments {
  std::string svg;
  std::string paths_csv;
  std::string scores_csv;
};

/// Two-panel SVG (paths with arrowheads at +2 sd, score scatter) plus CSV
/// companions. `labels` may be empty; otherwise one group label per row.
BiplotDocuments emit_biplot(const BiplotResult& biplot, const Eigen::MatrixXd& scores,
                            const std::vector<std::string>& labels,
                            const std::vector<std::string>& variable_names = {});

/// Parse the paths CSV written by emit_biplot.
std::vector<BiplotPath> parse_paths_csv(const std::string& text);

}  // namespace pns

#endif  // PNS_BIPLOT_HPP
