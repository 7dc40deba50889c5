#include "pns/model_select.hpp"

#include "pns/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pns {
namespace {

// Below this RSS a fit is treated as exact.
constexpr double kZeroRss = 1e-28;

void check_pair(const Eigen::VectorXd& g, const Eigen::VectorXd& s, const char* what) {
  if (g.size() != s.size()) {
    throw std::invalid_argument(std::string(what) + ": residual vectors differ in length");
  }
  if (g.size() < 3) {
    throw std::invalid_argument(std::string(what) + ": need at least 3 residuals");
  }
}

}  // namespace

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::small: return "small";
    case SelectionMode::great: return "great";
    case SelectionMode::ks: return "ks";
    case SelectionMode::var: return "var";
    case SelectionMode::lr: return "lr";
    case SelectionMode::bic: return "bic";
  }
  return "unknown";
}

SelectionMode parse_selection_mode(std::string_view name) {
  for (auto m : {SelectionMode::small, SelectionMode::great, SelectionMode::ks,
                 SelectionMode::var, SelectionMode::lr, SelectionMode::bic}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown selection mode '" + std::string(name) + "'");
}

double sample_variance(const Eigen::VectorXd& x) {
  if (x.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
  return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
}

KsResult ks_two_sample(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0) {
    throw std::invalid_argument("ks_two_sample: empty sample");
  }
  std::vector<double> sa(a.data(), a.data() + a.size());
  std::vector<double> sb(b.data(), b.data() + b.size());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());

  // Walk the pooled order; at each distinct value step past all ties in both
  // samples before comparing the ECDFs.
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // Once one sample is exhausted the gap only shrinks towards zero.

  const double en = std::sqrt(na * nb / (na + nb));
  KsResult r;
  r.statistic = d;
  r.p_value = std::clamp(1.0 - dist::kolmogorov_cdf(en * d), 0.0, 1.0);
  return r;
}

LevelTestResult ks_test(const Eigen::VectorXd& res_great, const Eigen::VectorXd& res_small,
                        double alpha) {
  check_pair(res_great, res_small, "ks_test");
  const KsResult ks = ks_two_sample(res_great.cwiseAbs(), res_small.cwiseAbs());
  LevelTestResult out;
  out.test = SelectionMode::ks;
  out.statistic = ks.statistic;
  out.p_value = ks.p_value;
  out.chose_small = ks.p_value < alpha;
  out.n = res_great.size();
  return out;
}

LevelTestResult variance_f_test(const Eigen::VectorXd& res_great,
                                const Eigen::VectorXd& res_small, double alpha) {
  check_pair(res_great, res_small, "variance_f_test");
  const auto n = static_cast<double>(res_great.size());
  LevelTestResult out;
  out.test = SelectionMode::var;
  out.n = res_great.size();
  const double vg = sample_variance(res_great);
  const double vs = sample_variance(res_small);
  if (vs <= kZeroRss) {
    out.degenerate = true;
    if (vg <= kZeroRss) {
      out.statistic = 1.0;
      out.p_value = 1.0;
      out.chose_small = false;
    } else {
      out.statistic = std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
      out.chose_small = true;
    }
    return out;
  }
  out.statistic = vg / vs;
  out.p_value = 1.0 - dist::f_cdf(out.statistic, n - 1.0, n - 1.0);
  out.chose_small = *out.p_value < alpha;
  return out;
}

LevelTestResult lr_test(const Eigen::VectorXd& res_great, const Eigen::VectorXd& res_small,
                        double alpha) {
  check_pair(res_great, res_small, "lr_test");
  const auto n = static_cast<double>(res_great.size());
  const double rss_g = res_great.squaredNorm();
  const double rss_s = res_small.squaredNorm();
  LevelTestResult out;
  out.test = SelectionMode::lr;
  out.n = res_great.size();
  if (rss_s <= kZeroRss) {
    out.degenerate = true;
    if (rss_g <= kZeroRss) {
      out.statistic = 0.0;
      out.p_value = 1.0;
      out.chose_small = false;
    } else {
      out.statistic = std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
      out.chose_small = true;
    }
    return out;
  }
  // RSS_small <= RSS_great holds up to rounding; clamp the log at zero.
  out.statistic = std::max(0.0, n * std::log(rss_g / rss_s));
  out.p_value = 1.0 - dist::chi2_cdf(out.statistic, 1.0);
  out.chose_small = *out.p_value < alpha;
  return out;
}

LevelTestResult bic_choice(const Eigen::VectorXd& res_great,
                           const Eigen::VectorXd& res_small, int axis_dim) {
  check_pair(res_great, res_small, "bic_choice");
  if (axis_dim < 1) throw std::invalid_argument("bic_choice: axis dimension must be >= 1");
  const auto n = static_cast<double>(res_great.size());
  const double rss_g = res_great.squaredNorm();
  const double rss_s = res_small.squaredNorm();
  LevelTestResult out;
  out.test = SelectionMode::bic;
  out.n = res_great.size();
  if (rss_s <= kZeroRss) {
    out.degenerate = true;
    out.chose_small = rss_g > kZeroRss;
    out.statistic = out.chose_small ? -std::numeric_limits<double>::infinity() : 0.0;
    return out;
  }
  const double bic_g = n * std::log(rss_g / n) + axis_dim * std::log(n);
  const double bic_s = n * std::log(rss_s / n) + (axis_dim + 1) * std::log(n);
  // Reported statistic: BIC_small - BIC_great (negative favours small).
  out.statistic = bic_s - bic_g;
  out.chose_small = bic_s < bic_g;
  return out;
}

}  // namespace pns
