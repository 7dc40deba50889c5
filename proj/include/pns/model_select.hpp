#ifndef PNS_MODEL_SELECT_HPP
#define PNS_MODEL_SELECT_HPP

// Great-vs-small subsphere decision rules. Every rule compares the residuals
// of a great and a small fit to the same data at one level.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

namespace pns {

enum class SelectionMode { small, great, ks, var, lr, bic };

std::string_view to_string(SelectionMode mode);
SelectionMode parse_selection_mode(std::string_view name);
inline bool is_test_mode(SelectionMode m) {
  return m == SelectionMode::ks || m == SelectionMode::var || m == SelectionMode::lr;
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

struct LevelTestResult {
  SelectionMode test = SelectionMode::small;
  double statistic = 0.0;
  std::optional<double> p_value;  // absent for bic
  bool chose_small = false;
  bool degenerate = false;
  long n = 0;
};

/// Two-sample KS statistic sup |F_a - F_b| and its asymptotic p-value with
/// effective size n_a n_b / (n_a + n_b).
KsResult ks_two_sample(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// KS test on |residuals|; chooses small when p < alpha.
LevelTestResult ks_test(const Eigen::VectorXd& res_great, const Eigen::VectorXd& res_small,
                        double alpha);

/// One-sided F test of var(great) / var(small) against F(n-1, n-1).
LevelTestResult variance_f_test(const Eigen::VectorXd& res_great,
                                const Eigen::VectorXd& res_small, double alpha);

/// Gaussian likelihood ratio n log(RSS_great / RSS_small) against chi2(1).
LevelTestResult lr_test(const Eigen::VectorXd& res_great, const Eigen::VectorXd& res_small,
                        double alpha);

/// n log(RSS/n) + k log n with k = m (great) or m + 1 (small).
LevelTestResult bic_choice(const Eigen::VectorXd& res_great,
                           const Eigen::VectorXd& res_small, int axis_dim);

double sample_variance(const Eigen::VectorXd& x);

}  // namespace pns

#endif  // PNS_MODEL_SELECT_HPP
