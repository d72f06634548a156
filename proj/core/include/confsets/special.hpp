#pragma once

#include <cstdint>

namespace confsets {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// Chi-square distribution function, dof > 0.
double chi_square_cdf(double x, double dof);

/// Chi-square quantile; prob in (0,1).
double chi_square_quantile(double prob, double dof);

/// Noncentral chi-square distribution function via the Poisson mixture of
/// central chi-squares.  The mixture is truncated once the tail mass drops
/// below 1e-12, which bounds the truncation error by the same amount.
double noncentral_chi_square_cdf(double x, double dof, double noncentrality);

/// Standard normal distribution function.
double normal_cdf(double x);

/// Standard normal quantile; prob in (0,1).
double normal_quantile(double prob);

/// Van der Corput radical inverse (Halton coordinate), index >= 0, base >= 2.
double halton(std::uint64_t index, unsigned base);

}  // namespace confsets
