#include "confsets/calibrate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "confsets/special.hpp"

namespace confsets {

namespace {

// Noncentrality of the worst sign vectors, with the runtime assertion that
// every maximizer agrees (they must: equal norms by construction).
double worst_noncentrality(const GramData& gram, const TuningVector& tuning, double sigma,
                           const std::vector<SignVector>& ds) {
  double first = -1.0;
  for (const auto& d : ds) {
    const Eigen::VectorXd v = gram.C_sqrt_inv * tuning.lambda().cwiseProduct(d.as_doubles());
    double delta = v.squaredNorm() / (sigma * sigma);
    if (tuning.regime() == Regime::FiniteSample)
      delta /= static_cast<double>(tuning.n());
    if (first < 0.0)
      first = delta;
    else if (std::abs(delta - first) > 1e-9 * std::max(1.0, first))
      throw std::logic_error("calibrate: tied worst-case sign vectors disagree on noncentrality");
  }
  return first;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("calibrate: alpha must lie in (0,1)");
}

}  // namespace

CalibrationResult calibrate_ellipse(const GramData& gram, const TuningVector& tuning,
                                    double sigma, double alpha) {
  check_alpha(alpha);
  if (!(sigma > 0.0)) throw std::invalid_argument("calibrate_ellipse: sigma must be positive");
  const int p = gram.p();
  const double s2 = sigma * sigma;
  const double target = 1.0 - alpha;

  CalibrationResult res(Ellipse(gram, 1.0));
  res.target = target;
  res.d_star = worst_case_d(gram, tuning);
  res.noncentrality = worst_noncentrality(gram, tuning, sigma, res.d_star);

  const double k_central = s2 * chi_square_quantile(target, static_cast<double>(p));
  if (res.noncentrality == 0.0) {
    res.k_star = k_central;
    res.achieved = ellipse_mass_exact(res.k_star / s2, 0.0, p);
    res.history.emplace_back(res.k_star, res.achieved);
    res.iterations = 1;
    res.shape = Ellipse(gram, res.k_star);
    return res;
  }

  auto coverage_at = [&](double k) {
    const double cov = ellipse_mass_exact(k / s2, res.noncentrality, p);
    res.history.emplace_back(k, cov);
    ++res.iterations;
    return cov;
  };

  // The noncentral distribution is stochastically larger than the central
  // one, so the central quantile is a valid lower bracket.
  double lo = k_central;
  double hi = k_central + 4.0 * s2 * (res.noncentrality + p);
  double cov_hi = coverage_at(hi);
  while (cov_hi < target && res.iterations < 200) {
    hi += 2.0 * (hi - lo);
    cov_hi = coverage_at(hi);
  }
  if (cov_hi < target)
    throw CalibrationBudgetError("calibrate_ellipse: failed to bracket the target coverage");

  double k_mid = hi, cov_mid = cov_hi;
  for (int it = 0; it < 200; ++it) {
    k_mid = 0.5 * (lo + hi);
    cov_mid = coverage_at(k_mid);
    if (std::abs(cov_mid - target) <= 1e-10) break;
    if (cov_mid < target)
      lo = k_mid;
    else
      hi = k_mid;
    if (hi - lo <= 1e-13 * (1.0 + k_mid)) break;
  }

  res.k_star = k_mid;
  res.achieved = cov_mid;
  res.shape = Ellipse(gram, res.k_star);
  return res;
}

CalibrationResult calibrate_hull(const GramData& gram, const TuningVector& tuning, double sigma,
                                 double alpha, const HullCalibrationConfig& config) {
  check_alpha(alpha);
  if (!(sigma > 0.0)) throw std::invalid_argument("calibrate_hull: sigma must be positive");
  if (gram.p() > 8)
    throw std::invalid_argument("calibrate_hull: 2^p member ellipses; supported for p <= 8");
  if (config.n_samples < 1000)
    throw std::invalid_argument("calibrate_hull: n_samples must be >= 1000");

  const int p = gram.p();
  const double s2 = sigma * sigma;
  const double target = 1.0 - alpha;
  const double se_target =
      std::sqrt(target * (1.0 - target) / static_cast<double>(config.n_samples));
  const double stop_tol = std::max(config.coverage_tol, 2.0 * se_target);

  CalibrationResult res(Ellipse(gram, 1.0));
  res.target = target;
  res.d_star = worst_case_d(gram, tuning);
  res.noncentrality = worst_noncentrality(gram, tuning, sigma, res.d_star);

  auto build = [&](double k) {
    return make_hull(gram, tuning, k, config.n_directions, config.membership_tol);
  };
  // One seed for every evaluation: the hull grows with k and all draws are
  // shared, so the empirical minimal coverage is exactly nondecreasing in k.
  auto coverage_at = [&](double k, std::size_t n) {
    const ConfidenceShape hull = build(k);
    const CoverageReport rep = min_coverage(hull, gram, tuning, sigma,
                                            McConfig{n, config.seed});
    res.history.emplace_back(k, rep.min_coverage);
    ++res.iterations;
    return rep;
  };

  // The hull at the centrally calibrated k contains each member ellipse,
  // whose own mass is the target exactly; expand upward in the unlikely
  // event the sampled minimum still falls short.
  const double k0 = s2 * chi_square_quantile(target, static_cast<double>(p));
  double hi = k0;
  double cov_hi = coverage_at(hi, config.n_samples).min_coverage;
  int guard = 0;
  while (cov_hi < target && ++guard <= 20) {
    hi *= 1.2;
    cov_hi = coverage_at(hi, config.n_samples).min_coverage;
  }
  if (cov_hi < target)
    throw CalibrationBudgetError("calibrate_hull: could not reach the target coverage");

  double lo = 0.5 * hi;
  double cov_lo = coverage_at(lo, config.n_samples).min_coverage;
  guard = 0;
  while (cov_lo >= target && ++guard <= 40) {
    lo *= 0.5;
    cov_lo = coverage_at(lo, config.n_samples).min_coverage;
  }
  if (cov_lo >= target)
    throw CalibrationBudgetError("calibrate_hull: could not bracket the target from below");

  double k_final = hi;
  bool stopped = false;
  while (res.iterations < config.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const double cov_mid = coverage_at(mid, config.n_samples).min_coverage;
    if (std::abs(cov_mid - target) <= stop_tol) {
      k_final = mid;
      stopped = true;
      break;
    }
    if (cov_mid < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-9 * (1.0 + mid)) {
      // Bracket collapsed without meeting the tolerance: the MC resolution
      // at this sample size cannot separate the target.
      throw CalibrationBudgetError(
          "calibrate_hull: bisection bracket collapsed before reaching tolerance " +
          std::to_string(stop_tol));
    }
  }
  if (!stopped)
    throw CalibrationBudgetError("calibrate_hull: iteration budget exhausted (" +
                                 std::to_string(config.max_iterations) + ")");

  // One confirmation pass at 10x the sample size.
  const CoverageReport confirm = coverage_at(k_final, 10 * config.n_samples);
  res.k_star = k_final;
  res.achieved = confirm.min_coverage;
  res.achieved_std_error = std::sqrt(confirm.min_coverage * (1.0 - confirm.min_coverage) /
                                     static_cast<double>(10 * config.n_samples));
  res.shape = build(k_final);
  return res;
}

ConsistentRegion consistent_set(const GramData& gram_limit, const Eigen::VectorXd& lambda0,
                                double lambda_star_n, long n, double d_scale) {
  if (lambda0.size() != gram_limit.p())
    throw std::invalid_argument("consistent_set: lambda0 dimension mismatch");
  // TuningVector::consistent enforces the normalization (max = 1, entries in
  // [0,1]) and lambda_star_n > 0.
  const TuningVector tuning = TuningVector::consistent(lambda0, lambda_star_n);
  if (n < 1) throw std::invalid_argument("consistent_set: n must be >= 1");
  if (!(d_scale > 0.0)) throw std::invalid_argument("consistent_set: d_scale must be positive");

  ConsistentRegion region{
      Parallelogram(gram_limit.C, tuning.lambda0(),
                    d_scale * lambda_star_n / static_cast<double>(n)),
      lambda_star_n / static_cast<double>(n), d_scale,
      std::abs(d_scale - 1.0) < 1e-12};
  return region;
}

}  // namespace confsets
