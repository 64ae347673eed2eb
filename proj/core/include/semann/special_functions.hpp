#pragma once

namespace semann::special {

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
double regularized_lower_gamma(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
double regularized_upper_gamma(double s, double x);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Upper-tail probability of a chi-square variate: P[X > x] with df d.
double chi_square_upper_tail(double x, double df);

/// Upper-tail probability of an F variate with (df1, df2) degrees of freedom.
double f_upper_tail(double f, double df1, double df2);

/// Standard normal CDF.
double normal_cdf(double z);

/// Two-sided normal p-value for a z statistic.
double normal_two_sided_p(double z);

/// Standard normal quantile (inverse CDF), bisection on normal_cdf.
double normal_quantile(double p);

}  // namespace semann::special
