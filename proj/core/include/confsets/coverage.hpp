#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "confsets/model.hpp"
#include "confsets/shapes.hpp"

namespace confsets {

enum class MassMethod { Exact, MonteCarlo };

struct MassEstimate {
  double probability = 0.0;
  double std_error = 0.0;
  MassMethod method = MassMethod::MonteCarlo;
};

struct McConfig {
  std::size_t n_samples = 1000000;
  std::uint64_t seed = 0;
};

/// Gaussian mass of a shape under N(mean, sigma^2 C^{-1}) by Monte Carlo:
/// Z_i = mean + sigma * C^{-1/2} xi_i.  Antithetic pairing (odd samples
/// negate the even draw they share a counter block with) keeps the marginal
/// law exact while cutting variance for symmetric shapes.  Deterministic in
/// (seed, n_samples) regardless of thread count.
MassEstimate gaussian_mass_mc(const ConfidenceShape& shape, const Eigen::VectorXd& mean,
                              const GramData& gram, double sigma, std::size_t n_samples,
                              std::uint64_t seed);

/// P(chi^2_p(noncentrality) <= k): the Gaussian mass of the ellipse
/// {z'Cz <= k sigma^2} under N(mean, sigma^2 C^{-1}) after the sphering
/// transform, with noncentrality = mean'C mean / sigma^2 and the k argument
/// already divided by sigma^2.  Absolute accuracy ~1e-10.
double ellipse_mass_exact(double k, double noncentrality, int p);

struct CoverageEntry {
  SignVector d;
  double probability = 0.0;
  double std_error = 0.0;
  MassMethod method = MassMethod::MonteCarlo;
};

struct CoverageReport {
  std::vector<CoverageEntry> per_d;  // sign-vector enumeration order
  double min_coverage = 0.0;
  std::vector<SignVector> argmin_d;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  MassMethod method = MassMethod::MonteCarlo;
  /// Which mean convention generated the per-d Gaussians: "negative" for the
  /// finite-sample -n^{-1/2}C^{-1}Lambda d, "positive" for the limit
  /// +C^{-1}Lambda d.  The min over d is unaffected (d <-> -d).
  std::string mean_sign_convention;
};

/// True when min_coverage will use the closed-form noncentral chi-square
/// path: the shape is the ellipse {z'Cz <= k} centered at 0 with C equal to
/// the Gram matrix (within 1e-12 relative).  Every other shape goes through
/// Monte Carlo and therefore needs a seed.
bool exact_coverage_applies(const ConfidenceShape& shape, const GramData& gram);

/// Minimal coverage over all 2^p sign vectors: min_d P(u^d in shape), where
/// u^d ~ N(shifted_mean(d), sigma^2 C^{-1}).  Exact noncentral chi-square
/// path when the shape is the centered ellipse {z'Cz <= k}; otherwise Monte
/// Carlo with common random numbers across all d (the same xi_i feed every
/// mean, so differences between sign vectors are low-variance).
///
/// Exact path ties: argmin_d is decided by exact equality of the
/// noncentrality (the CDF argument), which is the mathematically exact
/// argmin; MC ties by exact equality of counts.
CoverageReport min_coverage(const ConfidenceShape& shape, const GramData& gram,
                            const TuningVector& tuning, double sigma,
                            const McConfig& mc = McConfig{});

/// All maximizers of ||C^{-1/2} Lambda d|| over sign vectors (ties kept, in
/// enumeration order).  By the sphering argument these are exactly the
/// minimizers of the ellipse coverage.  Closed under negation.
std::vector<SignVector> worst_case_d(const GramData& gram, const TuningVector& tuning);

}  // namespace confsets
