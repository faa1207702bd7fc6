#ifndef EAAS_SPECIAL_FUNCTIONS_H
#define EAAS_SPECIAL_FUNCTIONS_H

#include <span>

namespace eaas {

/// log Gamma(x) for x > 0, safe to call concurrently.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

/// Standard normal CDF.
double normal_cdf(double x);

/// One term w * chi^2_dof of a weighted sum of independent central chi-square variables.
struct WeightedChiSquare {
    double weight;
    double dof;
};

/// P(sum_j w_j chi^2_{k_j} <= x) by numerical inversion of the characteristic
/// function, to absolute accuracy abs_tol.
double weighted_chi_square_cdf(std::span<const WeightedChiSquare> terms, double x, double abs_tol = 1e-9);

}  // namespace eaas

#endif
