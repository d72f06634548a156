#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "confsets/coverage.hpp"
#include "confsets/model.hpp"
#include "confsets/shapes.hpp"

namespace confsets {

struct CalibrationResult {
  explicit CalibrationResult(ConfidenceShape shape_) : shape(std::move(shape_)) {}

  ConfidenceShape shape;
  double k_star = 0.0;
  double target = 0.0;  // 1 - alpha
  double achieved = 0.0;
  double achieved_std_error = 0.0;  // 0 on the exact path
  int iterations = 0;               // coverage evaluations performed
  std::vector<std::pair<double, double>> history;  // (k, min coverage)
  std::vector<SignVector> d_star;
  double noncentrality = 0.0;
};

/// Exact ellipse calibration: finds k* with min_d P(u^d in E_C(k*)) = 1 -
/// alpha.  The worst sign vectors maximize ||C^{-1/2} Lambda d||; their
/// common noncentrality delta* feeds a bisection of the noncentral
/// chi-square CDF to 1e-10 absolute accuracy in probability.
CalibrationResult calibrate_ellipse(const GramData& gram, const TuningVector& tuning,
                                    double sigma, double alpha);

struct HullCalibrationConfig {
  std::size_t n_samples = 1000000;
  std::uint64_t seed = 0;
  /// Coverage tolerance of the stopping rule; the effective tolerance is
  /// max(coverage_tol, 2 * MC std error).
  double coverage_tol = 0.002;
  int n_directions = 0;   // 0 = default grid
  double membership_tol = -1.0;  // < 0 = default (1e-6 * diameter)
  int max_iterations = 80;
};

/// Shrink-loop calibration of the hull of shifted ellipses.  Starts from the
/// k whose single ellipse is exactly (1-alpha)-calibrated for the unpenalized
/// estimator, then bisects k on the Monte Carlo minimal coverage.  All
/// evaluations share one seed, so the empirical coverage is exactly monotone
/// in k and the bisection is well posed despite the noise; the final k is
/// re-evaluated once at 10x the sample size.
CalibrationResult calibrate_hull(const GramData& gram, const TuningVector& tuning, double sigma,
                                 double alpha, const HullCalibrationConfig& config);

/// The consistent-regime region: d_scale * (lambda*_n / n) * M, where M is
/// the parallelogram {m : |(Cm)_j| <= lambda0_j}.  The rate lambda*_n / n is
/// recorded separately so callers can recover the unscaled M.
struct ConsistentRegion {
  Parallelogram region;  // scale = d_scale * rate, folded in
  double rate = 0.0;     // lambda*_n / n
  double d_scale = 1.0;
  /// Set when d_scale == 1: the theory is silent on the boundary case, so
  /// neither coverage limit (0 or 1) applies.
  bool boundary_scale_warning = false;
};

ConsistentRegion consistent_set(const GramData& gram_limit, const Eigen::VectorXd& lambda0,
                                double lambda_star_n, long n, double d_scale);

}  // namespace confsets
