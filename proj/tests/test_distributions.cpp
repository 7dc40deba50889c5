#include "pns/distributions.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace pns::dist;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Integral of a density over [0, x] with t = u^2, which removes the sqrt-type
// singularity at the origin.
double integrate_density(const std::function<double(double)>& pdf, double x, int n) {
  return simpson([&](double u) { return pdf(u * u) * 2 * u; }, 0.0, std::sqrt(x), n);
}

double chi2_pdf(double x, double k) {
  if (x <= 0) return 0;
  return std::exp((k / 2 - 1) * std::log(x) - x / 2 - (k / 2) * std::log(2.0) -
                  std::lgamma(k / 2));
}

double f_pdf(double x, double a, double b) {
  if (x <= 0) return 0;
  const double lbeta = std::lgamma(a / 2) + std::lgamma(b / 2) - std::lgamma((a + b) / 2);
  return std::exp((a / 2) * std::log(a / b) + (a / 2 - 1) * std::log(x) -
                  ((a + b) / 2) * std::log1p(a * x / b) - lbeta);
}

}  // namespace

TEST_CASE("chi-squared cdf") {
  CHECK(chi2_cdf(0.0, 1) == 0.0);
  CHECK(std::abs(chi2_cdf(3.841459, 1) - 0.95) < 1e-6);
  CHECK(std::abs(chi2_cdf(5.991465, 2) - 0.95) < 1e-6);
  // dof 2 has the closed form 1 - exp(-x/2).
  for (double x : {0.1, 1.0, 4.0, 20.0}) {
    CHECK(chi2_cdf(x, 2) == doctest::Approx(1 - std::exp(-x / 2)).epsilon(1e-13));
  }
  for (double k : {3.0, 5.0, 10.0, 40.0}) {
    for (double x : {0.5, 2.0, 7.0, 30.0}) {
      const double q = integrate_density([k](double t) { return chi2_pdf(t, k); }, x, 20000);
      CHECK(chi2_cdf(x, k) == doctest::Approx(q).epsilon(1e-8));
    }
  }
  CHECK_THROWS(chi2_cdf(1.0, 0.0));
}

TEST_CASE("chi-squared quantile inverts the cdf") {
  for (double k : {1.0, 2.0, 7.0, 50.0}) {
    for (double q : {0.01, 0.5, 0.95, 0.999}) {
      CHECK(chi2_cdf(chi2_quantile(q, k), k) == doctest::Approx(q).epsilon(1e-10));
    }
  }
}

TEST_CASE("F cdf against quadrature") {
  for (auto [a, b] : {std::pair{3.0, 7.0}, {10.0, 10.0}, {99.0, 99.0}, {2.0, 30.0}}) {
    for (double x : {0.3, 1.0, 1.5, 4.0}) {
      const double q = integrate_density([a, b](double t) { return f_pdf(t, a, b); }, x, 40000);
      CHECK(f_cdf(x, a, b) == doctest::Approx(q).epsilon(1e-7));
    }
  }
  CHECK(f_cdf(1.0, 10, 10) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f_cdf(0.0, 3, 4) == 0.0);
}

TEST_CASE("F quantile round trip") {
  const double x = f_quantile(0.95, 10, 10);
  CHECK(std::abs(f_cdf(x, 10, 10) - 0.95) < 1e-8);
  for (double q : {0.05, 0.25, 0.5, 0.9, 0.99}) {
    for (double a : {1.0, 4.0, 25.0}) {
      for (double b : {2.0, 9.0, 120.0}) {
        CHECK(std::abs(f_cdf(f_quantile(q, a, b), a, b) - q) < 1e-8);
      }
    }
  }
  CHECK_THROWS(f_quantile(1.5, 2, 2));
}

TEST_CASE("Kolmogorov distribution") {
  CHECK(kolmogorov_cdf(0.0) == 0.0);
  // Standard critical values.
  CHECK(kolmogorov_cdf(1.3581) == doctest::Approx(0.95).epsilon(1e-4));
  CHECK(kolmogorov_cdf(1.6276) == doctest::Approx(0.99).epsilon(1e-4));
  // The small-x theta-function form agrees with the alternating series.
  for (double x : {0.4, 0.8, 1.0, 1.2, 2.0}) {
    double alt = 1.0;
    for (int k = 1; k < 200; ++k) alt += 2 * (k % 2 ? -1.0 : 1.0) * std::exp(-2.0 * k * k * x * x);
    CHECK(kolmogorov_cdf(x) == doctest::Approx(alt).epsilon(1e-10));
  }
  double prev = 0.0;
  for (double x = 0.05; x < 3.0; x += 0.05) {
    CHECK(kolmogorov_cdf(x) >= prev);
    prev = kolmogorov_cdf(x);
  }
}

TEST_CASE("incomplete functions at the edges") {
  CHECK(gamma_p(2.0, 0.0) == 0.0);
  CHECK(beta_inc(2.0, 3.0, 0.0) == 0.0);
  CHECK(beta_inc(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, 1) = x.
  CHECK(beta_inc(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-14));
  // Symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
  CHECK(beta_inc(2.5, 4.0, 0.3) == doctest::Approx(1 - beta_inc(4.0, 2.5, 0.7)).epsilon(1e-13));
}
