#include "confsets/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "confsets/parallel.hpp"
#include "confsets/rng.hpp"

namespace confsets {

namespace {

constexpr std::size_t kRepChunk = 1024;

// One column per replication: w_r = sigma * X' e_r.  Replication r owns the
// scalar noise indices [r*n, (r+1)*n), and the chunk grid is fixed, so the
// matrix is identical for every thread count.
Eigen::MatrixXd noise_stats(const Eigen::MatrixXd& X, double sigma, std::size_t reps,
                            std::uint64_t seed, bool two_point) {
  const long n = X.rows();
  Eigen::MatrixXd W(X.cols(), static_cast<long>(reps));
  for_each_chunk(reps, kRepChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
    Eigen::VectorXd e(n);
    for (std::size_t r = begin; r != end; ++r) {
      const std::uint64_t base = static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(n);
      if (two_point) {
        for (long i = 0; i < n; ++i) {
          e[i] = uniform_at(seed, stream::kNoise, base + static_cast<std::uint64_t>(i)) < 0.5
                     ? -1.0
                     : 1.0;
        }
      } else {
        normal_fill(seed, stream::kNoise, base, {e.data(), static_cast<std::size_t>(n)});
      }
      W.col(static_cast<long>(r)).noalias() = sigma * (X.transpose() * e);
    }
  });
  return W;
}

struct CountResult {
  std::size_t hits = 0;
  std::size_t failures = 0;
};

// Coverage counting for one true beta.  `scale` is sqrt(n) for root-n events
// and 1 for the consistent regime, where the raw difference beta_hat - beta
// is tested.  Per-chunk integer counts are reduced in chunk order.
CountResult count_hits(const GramLasso& core, const Eigen::MatrixXd& W,
                       const Eigen::VectorXd& beta, const Eigen::VectorXd& lambda, double scale,
                       const ConfidenceShape& shape) {
  const std::size_t reps = static_cast<std::size_t>(W.cols());
  const Eigen::VectorXd XtX_beta = core.XtX() * beta;
  const std::size_t n_chunks = chunk_count(reps, kRepChunk);
  std::vector<std::uint32_t> hit_c(n_chunks, 0);
  std::vector<std::uint32_t> fail_c(n_chunks, 0);
  for_each_chunk(reps, kRepChunk, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    Eigen::VectorXd Xty(beta.size());
    Eigen::VectorXd u(beta.size());
    for (std::size_t r = begin; r != end; ++r) {
      Xty = XtX_beta + W.col(static_cast<long>(r));
      try {
        const GramLasso::Result res = core.solve(Xty, lambda, core.least_squares(Xty));
        u = scale * (res.beta - beta);
        if (shape_contains(shape, u)) ++hit_c[ci];
      } catch (const NonConvergenceError&) {
        ++fail_c[ci];
      }
    }
  });
  CountResult out;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    out.hits += hit_c[c];
    out.failures += fail_c[c];
  }
  return out;
}

double binomial_se(double phat, std::size_t reps) {
  return std::sqrt(std::max(phat * (1.0 - phat), 0.0) / static_cast<double>(reps));
}

void check_template(const ModelTemplate& model) {
  if (model.X.rows() < model.X.cols() || model.X.cols() < 1)
    throw std::invalid_argument("design must have n >= p >= 1");
  if (!model.X.allFinite()) throw std::invalid_argument("design contains non-finite entries");
  if (!(model.sigma > 0.0) || !std::isfinite(model.sigma))
    throw std::invalid_argument("sigma must be positive and finite");
}

void check_finite_sample(const ModelTemplate& model, const TuningVector& tuning) {
  if (tuning.regime() != Regime::FiniteSample)
    throw WrongRegimeError("simulation requires finite-sample tuning");
  if (tuning.p() != static_cast<int>(model.X.cols()))
    throw std::invalid_argument("tuning dimension does not match the design");
  if (tuning.n() != model.X.rows())
    throw std::invalid_argument("tuning sample size does not match the design");
}

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

}  // namespace

Eigen::MatrixXd replicated_design(const Eigen::MatrixXd& C, long n) {
  const GramData gram = GramData::from_matrix(C);
  const int p = gram.p();
  if (n < p) throw std::invalid_argument("replicated design needs n >= p");
  if (n % p != 0) throw std::invalid_argument("replicated design needs n divisible by p");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.C);
  const Eigen::MatrixXd block = std::sqrt(static_cast<double>(p)) * es.eigenvectors() *
                                es.eigenvalues().cwiseSqrt().asDiagonal() *
                                es.eigenvectors().transpose();
  Eigen::MatrixXd X(n, p);
  for (long i = 0; i < n / p; ++i) X.middleRows(i * p, p) = block;
  return X;
}

EmpiricalCoverage empirical_coverage(const ModelTemplate& model, const Eigen::VectorXd& beta,
                                     const TuningVector& tuning, const ConfidenceShape& shape,
                                     std::size_t reps, std::uint64_t seed) {
  check_template(model);
  check_finite_sample(model, tuning);
  const int p = static_cast<int>(model.X.cols());
  if (beta.size() != p || !beta.allFinite())
    throw std::invalid_argument("beta must be a finite vector matching the design");
  if (shape_dim(shape) != p) throw std::invalid_argument("shape dimension does not match");
  if (reps < 1) throw std::invalid_argument("reps must be positive");

  const Eigen::MatrixXd W = noise_stats(model.X, model.sigma, reps, seed, false);
  const GramLasso core(model.X.transpose() * model.X);
  const double sqrt_n = std::sqrt(static_cast<double>(model.X.rows()));
  const CountResult count = count_hits(core, W, beta, tuning.lambda(), sqrt_n, shape);

  EmpiricalCoverage out;
  out.reps = reps;
  out.solver_failures = count.failures;
  out.coverage = static_cast<double>(count.hits) / static_cast<double>(reps);
  out.std_error = binomial_se(out.coverage, reps);
  return out;
}

std::vector<Eigen::VectorXd> expand_grid(const GridSpec& spec, int p, long n) {
  if (p < 1 || p > kMaxSignDim) throw std::invalid_argument("grid dimension out of range");
  if (n < 1) throw std::invalid_argument("grid needs a positive sample size");
  const double denom = spec.scale_by_sqrt_n ? std::sqrt(static_cast<double>(n)) : 1.0;
  const std::vector<SignVector> signs = all_sign_vectors(p);
  std::vector<Eigen::VectorXd> grid;
  bool have_zero = false;
  for (double mag : spec.magnitudes) {
    if (!(mag >= 0.0) || !std::isfinite(mag))
      throw std::invalid_argument("grid magnitudes must be finite and nonnegative");
    if (mag == 0.0) {
      if (!have_zero) grid.push_back(Eigen::VectorXd::Zero(p));
      have_zero = true;
      continue;
    }
    for (const SignVector& d : signs) grid.push_back((mag / denom) * d.as_doubles());
  }
  for (const Eigen::VectorXd& extra : spec.extra_points) {
    if (extra.size() != p || !extra.allFinite())
      throw std::invalid_argument("extra grid point has the wrong dimension");
    grid.push_back(extra);
  }
  if (grid.empty()) throw std::invalid_argument("empty parameter grid");
  return grid;
}

CoverageProfile coverage_profile(const ModelTemplate& model, const TuningVector& tuning,
                                 const ConfidenceShape& shape, const GridSpec& grid,
                                 std::size_t reps, std::uint64_t seed) {
  check_template(model);
  check_finite_sample(model, tuning);
  const int p = static_cast<int>(model.X.cols());
  if (shape_dim(shape) != p) throw std::invalid_argument("shape dimension does not match");
  if (reps < 1) throw std::invalid_argument("reps must be positive");
  const std::vector<Eigen::VectorXd> points = expand_grid(grid, p, model.X.rows());

  const Eigen::MatrixXd W = noise_stats(model.X, model.sigma, reps, seed, false);
  const GramLasso core(model.X.transpose() * model.X);
  const double sqrt_n = std::sqrt(static_cast<double>(model.X.rows()));

  CoverageProfile profile;
  profile.reps = reps;
  profile.seed = seed;
  profile.points.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CountResult count = count_hits(core, W, points[i], tuning.lambda(), sqrt_n, shape);
    ProfilePoint pt;
    pt.beta = points[i];
    pt.coverage = static_cast<double>(count.hits) / static_cast<double>(reps);
    pt.std_error = binomial_se(pt.coverage, reps);
    profile.points.push_back(std::move(pt));
    profile.solver_failures += count.failures;
    if (i == 0 || profile.points[i].coverage < profile.min_value) {
      profile.min_value = profile.points[i].coverage;
      profile.min_index = i;
    }
  }
  return profile;
}

Eigen::VectorXd minimize_limit_objective_q(const ExtendedVector& t, const Eigen::VectorXd& W,
                                           const GramData& gram, const Eigen::VectorXd& lambda) {
  const int p = gram.p();
  if (t.p() != p || W.size() != p || lambda.size() != p)
    throw std::invalid_argument("dimension mismatch in limit objective");
  if (!W.allFinite()) throw std::invalid_argument("W must be finite");
  for (int j = 0; j < p; ++j) {
    if (!(lambda[j] >= 0.0) || !std::isfinite(lambda[j]))
      throw std::invalid_argument("penalty weights must be finite and nonnegative");
  }

  const Eigen::MatrixXd& C = gram.C;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd Cu = Eigen::VectorXd::Zero(p);
  constexpr double kTol = 1e-9;
  constexpr int kMaxSweeps = 200000;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    for (int j = 0; j < p; ++j) {
      const double q = Cu[j] - C(j, j) * u[j] - W[j];
      double u_new;
      if (t.is_finite(j)) {
        // argmin over v = t_j + u_j of C_jj v^2 + 2 v (q - C_jj t_j) + 2 lambda_j |v|
        const double v = soft_threshold(C(j, j) * t.value(j) - q, lambda[j]) / C(j, j);
        u_new = v - t.value(j);
      } else {
        u_new = -(q + lambda[j] * static_cast<double>(t.inf_sign(j))) / C(j, j);
      }
      const double delta = u_new - u[j];
      if (delta != 0.0) {
        Cu.noalias() += C.col(j) * delta;
        u[j] = u_new;
      }
    }
    Cu.noalias() = C * u;  // fresh products for the optimality check
    double worst = 0.0;
    for (int j = 0; j < p; ++j) {
      const double g = Cu[j] - W[j];
      double viol;
      if (t.is_finite(j)) {
        const double v = t.value(j) + u[j];
        viol = v != 0.0 ? std::abs(g + lambda[j] * (v > 0.0 ? 1.0 : -1.0))
                        : std::max(0.0, std::abs(g) - lambda[j]);
      } else {
        viol = std::abs(g + lambda[j] * static_cast<double>(t.inf_sign(j)));
      }
      worst = std::max(worst, viol);
    }
    if (worst <= kTol) return u;
  }
  throw NonConvergenceError("limit-objective coordinate descent did not converge");
}

Eigen::VectorXd minimize_v_zeta(const ExtendedVector& zeta, const GramData& gram_limit,
                                const Eigen::VectorXd& lambda0) {
  return minimize_limit_objective_q(zeta, Eigen::VectorXd::Zero(gram_limit.p()), gram_limit,
                                    lambda0);
}

std::vector<ConsistentExperimentRow> consistent_regime_experiment(
    const ConsistentExperimentConfig& config) {
  const GramData gram_limit = GramData::from_matrix(config.C);
  const int p = gram_limit.p();
  if (p > kMaxSignDim) throw std::invalid_argument("dimension too large to enumerate signs");
  if (config.lambda_coef.size() != p)
    throw std::invalid_argument("penalty coefficients do not match the dimension");
  double coef_max = 0.0;
  for (int j = 0; j < p; ++j) {
    if (!(config.lambda_coef[j] >= 0.0) || !std::isfinite(config.lambda_coef[j]))
      throw std::invalid_argument("penalty coefficients must be finite and nonnegative");
    coef_max = std::max(coef_max, config.lambda_coef[j]);
  }
  if (coef_max <= 0.0) throw std::invalid_argument("at least one penalty coefficient must be positive");
  if (!(config.lambda_exponent > 0.5) || !(config.lambda_exponent < 1.0))
    throw WrongRegimeError("consistent tuning needs lambda_n = c n^kappa with 1/2 < kappa < 1");
  if (!(config.d_scale > 0.0)) throw std::invalid_argument("d_scale must be positive");
  if (config.n_list.empty()) throw std::invalid_argument("empty sample-size list");
  if (config.reps < 1) throw std::invalid_argument("reps must be positive");
  if (!(config.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");

  std::vector<ConsistentExperimentRow> rows;
  rows.reserve(config.n_list.size());
  for (long n : config.n_list) {
    const Eigen::VectorXd lambda_n =
        config.lambda_coef * std::pow(static_cast<double>(n), config.lambda_exponent);
    const double lambda_star = lambda_n.maxCoeff();
    const Eigen::VectorXd lambda0 = lambda_n / lambda_star;
    const ConsistentRegion region =
        consistent_set(gram_limit, lambda0, lambda_star, n, config.d_scale);

    const Eigen::MatrixXd X = replicated_design(gram_limit.C, n);
    const GramLasso core(X.transpose() * X);

    GridSpec spec;
    spec.magnitudes = config.magnitudes;
    spec.scale_by_sqrt_n = true;
    std::vector<Eigen::VectorXd> points = expand_grid(spec, p, n);
    // The boundary sequence: the estimator's bias parks it exactly on the
    // region's edge here, so this is where d_scale < 1 fails first.
    points.push_back(-region.rate * (gram_limit.C_inv * lambda0));
    const std::size_t boundary_index = points.size() - 1;

    // Independent noise per sample size; the multiplier is odd, so distinct
    // n map to distinct derived seeds.
    const std::uint64_t seed_n =
        config.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(n));
    const Eigen::MatrixXd W =
        noise_stats(X, config.sigma, config.reps, seed_n, config.two_point_noise);

    ConsistentExperimentRow row;
    row.n = n;
    row.rate = region.rate;
    row.d_scale = config.d_scale;
    const ConfidenceShape shape{region.region};
    for (std::size_t i = 0; i < points.size(); ++i) {
      const CountResult count = count_hits(core, W, points[i], lambda_n, 1.0, shape);
      ConsistentPointResult pt;
      pt.beta = points[i];
      pt.coverage = static_cast<double>(count.hits) / static_cast<double>(config.reps);
      pt.std_error = binomial_se(pt.coverage, config.reps);
      pt.is_boundary_point = i == boundary_index;
      row.solver_failures += count.failures;
      if (i == 0 || pt.coverage < row.worst_coverage) {
        row.worst_coverage = pt.coverage;
        row.worst_beta = pt.beta;
      }
      if (pt.is_boundary_point) row.boundary_coverage = pt.coverage;
      row.points.push_back(std::move(pt));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SelectionFrequency selection_frequency(const ModelTemplate& model, const TuningVector& tuning,
                                       const std::vector<Eigen::VectorXd>& beta_grid,
                                       std::size_t reps, std::uint64_t seed) {
  check_template(model);
  check_finite_sample(model, tuning);
  const int p = static_cast<int>(model.X.cols());
  if (beta_grid.empty()) throw std::invalid_argument("empty parameter grid");
  for (const Eigen::VectorXd& beta : beta_grid) {
    if (beta.size() != p || !beta.allFinite())
      throw std::invalid_argument("grid point has the wrong dimension");
  }
  if (reps < 1) throw std::invalid_argument("reps must be positive");

  const Eigen::MatrixXd W = noise_stats(model.X, model.sigma, reps, seed, false);
  const GramLasso core(model.X.transpose() * model.X);

  SelectionFrequency out;
  out.beta_grid = beta_grid;
  out.reps = reps;
  out.seed = seed;
  out.zero_frequency.resize(static_cast<long>(beta_grid.size()), p);
  const std::size_t n_chunks = chunk_count(reps, kRepChunk);
  for (std::size_t g = 0; g < beta_grid.size(); ++g) {
    const Eigen::VectorXd XtX_beta = core.XtX() * beta_grid[g];
    std::vector<std::uint32_t> zero_c(n_chunks * static_cast<std::size_t>(p), 0);
    std::vector<std::uint32_t> fail_c(n_chunks, 0);
    for_each_chunk(reps, kRepChunk, [&](std::size_t ci, std::size_t begin, std::size_t end) {
      Eigen::VectorXd Xty(p);
      for (std::size_t r = begin; r != end; ++r) {
        Xty = XtX_beta + W.col(static_cast<long>(r));
        try {
          const GramLasso::Result res = core.solve(Xty, tuning.lambda(), core.least_squares(Xty));
          for (int j = 0; j < p; ++j) {
            // exact selection event: inactive coordinates are literal zeros
            if (res.beta[j] == 0.0) ++zero_c[ci * static_cast<std::size_t>(p) + j];
          }
        } catch (const NonConvergenceError&) {
          ++fail_c[ci];
        }
      }
    });
    for (int j = 0; j < p; ++j) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < n_chunks; ++c) total += zero_c[c * static_cast<std::size_t>(p) + j];
      out.zero_frequency(static_cast<long>(g), j) =
          static_cast<double>(total) / static_cast<double>(reps);
    }
    for (std::size_t c = 0; c < n_chunks; ++c) out.solver_failures += fail_c[c];
  }
  return out;
}

}  // namespace confsets
