#include "pns/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pns::dist {
namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string(what) + " must be positive and finite");
  }
}

void require_probability(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("probability outside [0, 1]");
}

double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a, x) by the Legendre continued fraction (modified Lentz).
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

// Bisection on a monotone cdf over [lo, hi] (hi grows until it brackets q).
template <typename Cdf>
double invert_cdf(Cdf cdf, double q, double hi) {
  double lo = 0.0;
  while (cdf(hi) < q) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double gamma_p(double a, double x) {
  require_positive(a, "gamma_p shape");
  if (x <= 0.0) return 0.0;
  if (!std::isfinite(x)) return 1.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_continued_fraction(a, x);
}

double beta_inc(double a, double b, double x) {
  require_positive(a, "beta_inc a");
  require_positive(b, "beta_inc b");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double chi2_cdf(double x, double dof) {
  require_positive(dof, "chi2 degrees of freedom");
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double q, double dof) {
  require_positive(dof, "chi2 degrees of freedom");
  require_probability(q);
  if (q == 0.0) return 0.0;
  if (q == 1.0) return std::numeric_limits<double>::infinity();
  return invert_cdf([dof](double x) { return chi2_cdf(x, dof); }, q, dof + 1.0);
}

double f_cdf(double x, double dof1, double dof2) {
  require_positive(dof1, "F numerator degrees of freedom");
  require_positive(dof2, "F denominator degrees of freedom");
  if (x <= 0.0) return 0.0;
  if (!std::isfinite(x)) return 1.0;
  const double t = dof1 * x / (dof1 * x + dof2);
  return beta_inc(0.5 * dof1, 0.5 * dof2, t);
}

double f_quantile(double q, double dof1, double dof2) {
  require_positive(dof1, "F numerator degrees of freedom");
  require_positive(dof2, "F denominator degrees of freedom");
  require_probability(q);
  if (q == 0.0) return 0.0;
  if (q == 1.0) return std::numeric_limits<double>::infinity();
  return invert_cdf([=](double x) { return f_cdf(x, dof1, dof2); }, q, 2.0);
}

double kolmogorov_cdf(double x) {
  if (std::isnan(x)) throw std::domain_error("kolmogorov_cdf: NaN argument");
  if (x <= 0.0) return 0.0;
  constexpr double pi = std::numbers::pi;
  if (x < 1.18) {
    // Jacobi theta form, fast for small x.
    const double w = pi * pi / (8.0 * x * x);
    double sum = 0.0;
    for (int k = 1; k < 100; k += 2) {
      const double term = std::exp(-static_cast<double>(k * k) * w);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return std::sqrt(2.0 * pi) / x * sum;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * sum;
}

}  // namespace pns::dist
