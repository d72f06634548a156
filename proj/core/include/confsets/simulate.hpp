#pragma once

#include <cstdint>
#include <vector>

#include "confsets/calibrate.hpp"
#include "confsets/lasso.hpp"
#include "confsets/model.hpp"
#include "confsets/shapes.hpp"

namespace confsets {

/// Design and noise level shared by all replications; the response is
/// regenerated per replication as y = X beta + sigma * e.
struct ModelTemplate {
  Eigen::MatrixXd X;
  double sigma = 1.0;
};

/// A design with X'X/n equal to the given SPD matrix up to rounding: n/p
/// stacked copies of sqrt(p) * C^{1/2}.  Requires n divisible by p.
Eigen::MatrixXd replicated_design(const Eigen::MatrixXd& C, long n);

struct EmpiricalCoverage {
  double coverage = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::size_t solver_failures = 0;  // must be 0 in a valid run
};

/// Fraction of replications with sqrt(n) (beta_hat - beta) in the shape.
/// Noise for replication r occupies scalar indices [r*n, (r+1)*n) of the
/// noise stream, so every replication is addressable and the result is
/// independent of threading.  Non-convergent replications are counted as
/// misses and reported.
EmpiricalCoverage empirical_coverage(const ModelTemplate& model, const Eigen::VectorXd& beta,
                                     const TuningVector& tuning, const ConfidenceShape& shape,
                                     std::size_t reps, std::uint64_t seed);

/// Grid of true-parameter values: every sign pattern at each magnitude
/// (divided by sqrt(n) when scale_by_sqrt_n), the zero point once, plus any
/// explicit extra points.
struct GridSpec {
  std::vector<double> magnitudes = {0.0, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0};
  bool scale_by_sqrt_n = true;
  std::vector<Eigen::VectorXd> extra_points;
};

std::vector<Eigen::VectorXd> expand_grid(const GridSpec& spec, int p, long n);

struct ProfilePoint {
  Eigen::VectorXd beta;
  double coverage = 0.0;
  double std_error = 0.0;
};

struct CoverageProfile {
  std::vector<ProfilePoint> points;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::size_t min_index = 0;
  double min_value = 1.0;
  std::size_t solver_failures = 0;
};

/// empirical_coverage over a grid, reusing one noise stream: replication r
/// sees the same draws at every grid point (common random numbers), and each
/// point's result is bit-identical to a standalone empirical_coverage call
/// with the same seed.
CoverageProfile coverage_profile(const ModelTemplate& model, const TuningVector& tuning,
                                 const ConfidenceShape& shape, const GridSpec& grid,
                                 std::size_t reps, std::uint64_t seed);

/// Minimizer of u'Cu - 2W'u + 2 sum_j lambda_j pen_j(u_j) where pen_j is
/// |t_j + u_j| - |t_j| for finite t_j and sign(t_j) * u_j for infinite t_j.
/// Coordinate descent; the subgradient residual (on the half-gradient scale
/// (Cu)_j - W_j + lambda_j * ...) is verified <= 1e-9.
Eigen::VectorXd minimize_limit_objective_q(const ExtendedVector& t, const Eigen::VectorXd& W,
                                           const GramData& gram, const Eigen::VectorXd& lambda);

/// Deterministic variant with W = 0 and weights lambda0.
Eigen::VectorXd minimize_v_zeta(const ExtendedVector& zeta, const GramData& gram_limit,
                                const Eigen::VectorXd& lambda0);

struct ConsistentExperimentConfig {
  Eigen::MatrixXd C;            // limit Gram matrix; designs replicate it
  Eigen::VectorXd lambda_coef;  // lambda_{n,j} = lambda_coef_j * n^lambda_exponent
  double lambda_exponent = 0.75;
  double d_scale = 1.5;
  std::vector<long> n_list;
  std::size_t reps = 10000;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  std::vector<double> magnitudes = {0.0, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0};
  /// Centered two-point noise (+-sigma) instead of Gaussian; the consistent
  /// regime does not need normality.
  bool two_point_noise = false;
};

struct ConsistentPointResult {
  Eigen::VectorXd beta;
  double coverage = 0.0;
  double std_error = 0.0;
  bool is_boundary_point = false;
};

struct ConsistentExperimentRow {
  long n = 0;
  double rate = 0.0;  // lambda*_n / n
  double d_scale = 0.0;
  std::vector<ConsistentPointResult> points;
  double worst_coverage = 1.0;
  Eigen::VectorXd worst_beta;
  double boundary_coverage = 0.0;
  std::size_t solver_failures = 0;
};

/// Coverage of the event beta in beta_hat - d_scale * (lambda*_n/n) * M per
/// sample size, over a beta grid that always includes the boundary sequence
/// beta_n = -(lambda*_n/n) C^{-1} lambda0 (the point where the estimator
/// lands exactly on the region's edge as n grows).
std::vector<ConsistentExperimentRow> consistent_regime_experiment(
    const ConsistentExperimentConfig& config);

struct SelectionFrequency {
  std::vector<Eigen::VectorXd> beta_grid;
  Eigen::MatrixXd zero_frequency;  // one row per grid point, one column per coordinate
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::size_t solver_failures = 0;
};

/// Frequency of the exact selection event {beta_hat_j = 0} per grid point.
SelectionFrequency selection_frequency(const ModelTemplate& model, const TuningVector& tuning,
                                       const std::vector<Eigen::VectorXd>& beta_grid,
                                       std::size_t reps, std::uint64_t seed);

}  // namespace confsets
