#include "confsets/special.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace confsets {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Series expansion of P(a,x); effective for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x); effective for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double chi_square_pdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  const double half = 0.5 * dof;
  return std::exp((half - 1.0) * std::log(x) - 0.5 * x - std::lgamma(half) -
                  half * std::numbers::ln2);
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(a) || !std::isfinite(x))
    throw std::invalid_argument("regularized_gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_square_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi_square_cdf: dof must be positive");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi_square_quantile(double prob, double dof) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("chi_square_quantile: prob must lie in (0,1)");
  if (!(dof > 0.0)) throw std::invalid_argument("chi_square_quantile: dof must be positive");

  // Wilson-Hilferty starting point, then safeguarded Newton.
  const double z = normal_quantile(prob);
  const double c = 2.0 / (9.0 * dof);
  double x = dof * std::pow(1.0 - c + z * std::sqrt(c), 3.0);
  if (!(x > 0.0)) x = 0.5 * dof;

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i) {
    const double f = chi_square_cdf(x, dof) - prob;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    const double pdf = chi_square_pdf(x, dof);
    double step = pdf > 0.0 ? f / pdf : 0.0;
    double next = x - step;
    if (!(next > lo && (next < hi)))  // Newton left the bracket: bisect
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * (lo + 1.0);
    if (std::abs(next - x) <= 1e-14 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

double noncentral_chi_square_cdf(double x, double dof, double noncentrality) {
  if (!(dof > 0.0))
    throw std::invalid_argument("noncentral_chi_square_cdf: dof must be positive");
  if (noncentrality < 0.0 || !std::isfinite(noncentrality))
    throw std::invalid_argument("noncentral_chi_square_cdf: noncentrality must be >= 0");
  if (x <= 0.0) return 0.0;
  if (noncentrality == 0.0) return chi_square_cdf(x, dof);

  constexpr double kTailTol = 1e-12;
  const double half = 0.5 * noncentrality;

  // Start at the modal Poisson index and sweep outward in both directions
  // until the accumulated mixture weight is within kTailTol of 1.
  const std::int64_t mode = static_cast<std::int64_t>(half);
  const double log_w_mode = -half + static_cast<double>(mode) * std::log(half) -
                            std::lgamma(static_cast<double>(mode) + 1.0);
  const double w_mode = std::exp(log_w_mode);

  double result = w_mode * chi_square_cdf(x, dof + 2.0 * static_cast<double>(mode));
  double mass = w_mode;

  double w_up = w_mode;
  std::int64_t i_up = mode;
  double w_down = w_mode;
  std::int64_t i_down = mode;
  for (int iter = 0; iter < 100000 && mass < 1.0 - kTailTol; ++iter) {
    bool advanced = false;
    w_up *= half / static_cast<double>(i_up + 1);
    ++i_up;
    if (w_up > 0.0) {
      result += w_up * chi_square_cdf(x, dof + 2.0 * static_cast<double>(i_up));
      mass += w_up;
      advanced = true;
    }
    if (i_down > 0) {
      w_down *= static_cast<double>(i_down) / half;
      --i_down;
      result += w_down * chi_square_cdf(x, dof + 2.0 * static_cast<double>(i_down));
      mass += w_down;
      advanced = true;
    }
    if (!advanced) break;
  }
  return result < 1.0 ? result : 1.0;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("normal_quantile: prob must lie in (0,1)");

  // Acklam's rational approximation, then one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - prob;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double halton(std::uint64_t index, unsigned base) {
  if (base < 2) throw std::invalid_argument("halton: base must be >= 2");
  double f = 1.0;
  double r = 0.0;
  std::uint64_t i = index;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace confsets
