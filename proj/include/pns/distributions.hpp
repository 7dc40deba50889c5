#ifndef PNS_DISTRIBUTIONS_HPP
#define PNS_DISTRIBUTIONS_HPP

// Distribution functions needed by the great-vs-small model-choice tests.
// All functions throw std::domain_error on invalid degrees of freedom or
// probabilities.

namespace pns::dist {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

double chi2_cdf(double x, double dof);
double chi2_quantile(double q, double dof);

double f_cdf(double x, double dof1, double dof2);
double f_quantile(double q, double dof1, double dof2);

/// Limiting distribution of sqrt(n) D_n for the Kolmogorov-Smirnov statistic.
double kolmogorov_cdf(double x);

}  // namespace pns::dist

#endif  // PNS_DISTRIBUTIONS_HPP
