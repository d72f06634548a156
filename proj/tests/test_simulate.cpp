#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "confsets/calibrate.hpp"
#include "confsets/errors.hpp"
#include "confsets/parallel.hpp"
#include "confsets/simulate.hpp"
#include "confsets/special.hpp"

using namespace confsets;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd worked_C() {
  MatrixXd C(2, 2);
  C << 1.0, -0.5, -0.5, 1.0;
  return C;
}

const double kInf = std::numeric_limits<double>::infinity();

double limit_objective(const ExtendedVector& t, const VectorXd& W, const MatrixXd& C,
                       const VectorXd& lambda, const VectorXd& u) {
  double pen = 0.0;
  for (int j = 0; j < u.size(); ++j)
    pen += t.is_finite(j) ? lambda[j] * (std::abs(t.value(j) + u[j]) - std::abs(t.value(j)))
                          : lambda[j] * t.inf_sign(j) * u[j];
  return u.dot(C * u) - 2.0 * W.dot(u) + 2.0 * pen;
}

}  // namespace

TEST_CASE("replicated_design reproduces the target Gram matrix") {
  const MatrixXd C = worked_C();
  const MatrixXd X = replicated_design(C, 20);
  REQUIRE(X.rows() == 20);
  REQUIRE(X.cols() == 2);
  CHECK((X.transpose() * X / 20.0 - C).cwiseAbs().maxCoeff() < 1e-12);

  MatrixXd C3 = MatrixXd::Identity(3, 3);
  C3(0, 2) = C3(2, 0) = 0.4;
  const MatrixXd X3 = replicated_design(C3, 300);
  CHECK((X3.transpose() * X3 / 300.0 - C3).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(replicated_design(C, 21), std::invalid_argument);  // 21 % 2 != 0
  CHECK_THROWS_AS(replicated_design(C, 0), std::invalid_argument);
  MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(replicated_design(bad, 20), SingularDesignError);
}

TEST_CASE("empirical coverage of the unpenalized ellipse matches its exact level") {
  const MatrixXd X = replicated_design(worked_C(), 20);
  const GramData g = GramData::from_matrix((X.transpose() * X / 20.0).eval());
  const ModelTemplate model{X, 1.0};
  const double k_ls = chi_square_quantile(0.95, 2.0);
  const TuningVector zero = TuningVector::finite_sample(VectorXd::Zero(2), 20);

  VectorXd beta(2);
  beta << 0.7, -0.3;
  const auto res = empirical_coverage(model, beta, zero, Ellipse(g, k_ls), 20000, 31);
  CHECK(res.reps == 20000);
  CHECK(res.solver_failures == 0);
  CHECK(res.std_error > 0.0);
  // exact level 0.95 for every beta when nothing is penalized
  CHECK(std::abs(res.coverage - 0.95) < 3.5 * res.std_error);
}

TEST_CASE("profile points are bit-identical to standalone runs") {
  const MatrixXd X = replicated_design(worked_C(), 20);
  const GramData g = GramData::from_matrix((X.transpose() * X / 20.0).eval());
  const ModelTemplate model{X, 1.0};
  const TuningVector tuning =
      TuningVector::finite_sample(VectorXd::Constant(2, std::sqrt(5.0)), 20);
  const ConfidenceShape shape = Ellipse(g, 8.642203874181078);

  GridSpec spec;
  spec.magnitudes = {0.0, 1.0, 5.0};
  const auto profile = coverage_profile(model, tuning, shape, spec, 4000, 77);
  REQUIRE(profile.points.size() == 9);  // zero once + 2 magnitudes x 4 signs
  CHECK(profile.reps == 4000);
  CHECK(profile.seed == 77);
  CHECK(profile.solver_failures == 0);

  double min_seen = 2.0;
  std::size_t min_at = 0;
  for (std::size_t i = 0; i < profile.points.size(); ++i) {
    const auto& pt = profile.points[i];
    const auto solo = empirical_coverage(model, pt.beta, tuning, shape, 4000, 77);
    CHECK(pt.coverage == solo.coverage);  // same noise stream, same arithmetic
    CHECK(pt.std_error == solo.std_error);
    if (pt.coverage < min_seen) {
      min_seen = pt.coverage;
      min_at = i;
    }
  }
  CHECK(profile.min_value == min_seen);
  CHECK(profile.min_index == min_at);

  // thread count must not change anything
  set_max_threads(4);
  const auto profile4 = coverage_profile(model, tuning, shape, spec, 4000, 77);
  set_max_threads(1);
  for (std::size_t i = 0; i < profile.points.size(); ++i)
    CHECK(profile.points[i].coverage == profile4.points[i].coverage);
}

TEST_CASE("expand_grid layout") {
  GridSpec spec;
  spec.magnitudes = {0.0, 0.5, 2.0};
  const auto grid = expand_grid(spec, 2, 100);
  REQUIRE(grid.size() == 9);
  CHECK(grid[0] == VectorXd::Zero(2));
  // first magnitude block: 0.5/sqrt(100) = 0.05 times each sign vector
  const auto signs = all_sign_vectors(2);
  for (int i = 0; i < 4; ++i)
    CHECK((grid[1 + i] - 0.05 * signs[i].as_doubles()).cwiseAbs().maxCoeff() < 1e-15);
  for (int i = 0; i < 4; ++i)
    CHECK((grid[5 + i] - 0.2 * signs[i].as_doubles()).cwiseAbs().maxCoeff() < 1e-15);

  GridSpec raw;
  raw.magnitudes = {3.0};
  raw.scale_by_sqrt_n = false;
  VectorXd extra(2);
  extra << -9.0, 2.0;
  raw.extra_points = {extra};
  const auto grid2 = expand_grid(raw, 2, 100);
  REQUIRE(grid2.size() == 5);
  CHECK(grid2[0][0] == 3.0);   // unscaled
  CHECK(grid2[4] == extra);    // extras appended last

  GridSpec dup;
  dup.magnitudes = {0.0, 0.0, 1.0};
  CHECK(expand_grid(dup, 2, 100).size() == 5);  // zero deduplicated

  GridSpec bad;
  bad.magnitudes = {-1.0};
  CHECK_THROWS_AS(expand_grid(bad, 2, 100), std::invalid_argument);
  GridSpec empty;
  empty.magnitudes = {};
  CHECK_THROWS_AS(expand_grid(empty, 2, 100), std::invalid_argument);
  GridSpec nf;
  nf.magnitudes = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(expand_grid(nf, 2, 100), std::invalid_argument);
}

TEST_CASE("limit objective minimizer: closed forms on a diagonal matrix") {
  MatrixXd D = MatrixXd::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 2.0;
  const GramData g = GramData::from_matrix(D);
  VectorXd W(2), lambda(2), t(2);
  W << 0.8, -1.4;
  lambda << 0.5, 1.0;
  t << 0.3, -0.2;

  const VectorXd u = minimize_limit_objective_q(ExtendedVector(t), W, g, lambda);
  for (int j = 0; j < 2; ++j) {
    // per coordinate: v* = soft(C_jj t_j + W_j, lambda_j) / C_jj, u* = v* - t_j
    const double arg = D(j, j) * t[j] + W[j];
    const double soft = std::copysign(std::max(std::abs(arg) - lambda[j], 0.0), arg);
    CHECK(u[j] == doctest::Approx(soft / D(j, j) - t[j]).epsilon(1e-9));
  }
}

TEST_CASE("limit objective minimizer: optimality against perturbations") {
  const GramData g = GramData::from_matrix(worked_C());
  VectorXd W(2), lambda(2);
  W << 1.2, 0.4;
  lambda << 0.9, 0.6;

  const VectorXd finite_t = (VectorXd(2) << 0.5, -1.0).finished();
  const VectorXd mixed_t = (VectorXd(2) << kInf, 0.25).finished();
  const VectorXd inf_t = (VectorXd(2) << -kInf, kInf).finished();
  for (const VectorXd& traw : {finite_t, mixed_t, inf_t}) {
    const ExtendedVector t(traw);
    const VectorXd u = minimize_limit_objective_q(t, W, g, lambda);
    const double base = limit_objective(t, W, g.C, lambda, u);
    for (int j = 0; j < 2; ++j)
      for (double eps : {1e-6, 1e-3, 0.1}) {
        for (double s : {-1.0, 1.0}) {
          VectorXd v = u;
          v[j] += s * eps;
          CHECK(base <= limit_objective(t, W, g.C, lambda, v) + 1e-11);
        }
      }
  }

  // all-infinite anchor has the linear-penalty closed form u = C^{-1}(W - lambda o s)
  const ExtendedVector t(inf_t);
  const VectorXd u = minimize_limit_objective_q(t, W, g, lambda);
  VectorXd shift(2);
  shift << W[0] - lambda[0] * (-1.0), W[1] - lambda[1] * (1.0);
  CHECK((u - g.C_inv * shift).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("minimize_v_zeta: zero anchor and vertex anchors") {
  const GramData g = GramData::from_matrix(worked_C());
  VectorXd lambda0(2);
  lambda0 << 1.0, 0.8;

  const VectorXd u0 = minimize_v_zeta(ExtendedVector(VectorXd::Zero(2)), g, lambda0);
  CHECK(u0.cwiseAbs().maxCoeff() < 1e-9);  // zero is already the kink

  // anchor at the negated vertex lands the minimizer exactly on the vertex
  for (const auto& d : all_sign_vectors(2)) {
    const VectorXd vertex = g.C_inv * lambda0.cwiseProduct(d.as_doubles());
    const VectorXd u = minimize_v_zeta(ExtendedVector((-vertex).eval()), g, lambda0);
    CHECK((u - vertex).cwiseAbs().maxCoeff() < 1e-8);
    // and the minimizer satisfies the parallelogram inequality |(Cu)_j| <= lambda0_j
    const VectorXd cu = g.C * u;
    for (int j = 0; j < 2; ++j) CHECK(std::abs(cu[j]) <= lambda0[j] + 1e-8);
  }
}

TEST_CASE("consistent-regime experiment: coverage splits by the region scale") {
  ConsistentExperimentConfig cfg;
  cfg.C = worked_C();
  cfg.lambda_coef = VectorXd::Ones(2);
  cfg.lambda_exponent = 0.75;
  cfg.n_list = {200};
  cfg.reps = 2000;
  cfg.seed = 5;
  cfg.magnitudes = {0.0, 1.0, 20.0};

  cfg.d_scale = 1.5;
  const auto wide = consistent_regime_experiment(cfg);
  REQUIRE(wide.size() == 1);
  CHECK(wide[0].n == 200);
  CHECK(wide[0].rate == doctest::Approx(std::pow(200.0, 0.75) / 200.0).epsilon(1e-15));
  CHECK(wide[0].solver_failures == 0);
  int boundary_points = 0;
  for (const auto& pt : wide[0].points) boundary_points += pt.is_boundary_point ? 1 : 0;
  CHECK(boundary_points == 1);
  CHECK(wide[0].boundary_coverage > 0.95);
  CHECK(wide[0].worst_coverage <= wide[0].boundary_coverage);

  cfg.d_scale = 0.5;
  const auto narrow = consistent_regime_experiment(cfg);
  CHECK(narrow[0].boundary_coverage < 0.2);
  CHECK(narrow[0].boundary_coverage < wide[0].boundary_coverage);

  // the boundary sequence is beta_n = -(lambda*_n / n) C^{-1} lambda0
  const GramData g = GramData::from_matrix(worked_C());
  const double rate = std::pow(200.0, 0.75) / 200.0;
  const VectorXd expected_boundary = -rate * (g.C_inv * VectorXd::Ones(2));
  for (const auto& pt : narrow[0].points)
    if (pt.is_boundary_point)
      CHECK((pt.beta - expected_boundary).cwiseAbs().maxCoeff() < 1e-12);

  // two-point noise drives the same dichotomy (no normality needed here)
  cfg.two_point_noise = true;
  cfg.d_scale = 1.5;
  CHECK(consistent_regime_experiment(cfg)[0].boundary_coverage > 0.95);
  cfg.d_scale = 0.5;
  CHECK(consistent_regime_experiment(cfg)[0].boundary_coverage < 0.2);
}

TEST_CASE("consistent-regime experiment validates the tuning rate") {
  ConsistentExperimentConfig cfg;
  cfg.C = worked_C();
  cfg.lambda_coef = VectorXd::Ones(2);
  cfg.n_list = {100};
  cfg.reps = 1000;

  cfg.lambda_exponent = 0.5;  // boundary of the allowed range
  CHECK_THROWS_AS(consistent_regime_experiment(cfg), WrongRegimeError);
  cfg.lambda_exponent = 1.0;
  CHECK_THROWS_AS(consistent_regime_experiment(cfg), WrongRegimeError);

  cfg.lambda_exponent = 0.75;
  cfg.d_scale = 0.0;
  CHECK_THROWS_AS(consistent_regime_experiment(cfg), std::invalid_argument);
  cfg.d_scale = 1.5;
  cfg.lambda_coef = VectorXd::Zero(2);
  CHECK_THROWS_AS(consistent_regime_experiment(cfg), std::invalid_argument);
  cfg.lambda_coef = (VectorXd(2) << 1.0, -0.5).finished();
  CHECK_THROWS_AS(consistent_regime_experiment(cfg), std::invalid_argument);
  cfg.lambda_coef = VectorXd::Ones(2);
  cfg.n_list = {};
  CHECK_THROWS_AS(consistent_regime_experiment(cfg), std::invalid_argument);
}

TEST_CASE("selection frequency against the orthogonal-design closed form") {
  const long n = 20;
  const MatrixXd X = replicated_design(MatrixXd::Identity(2, 2), n);
  const ModelTemplate model{X, 1.0};
  const double lam = 3.0;
  const TuningVector tuning = TuningVector::finite_sample(VectorXd::Constant(2, lam), n);

  std::vector<VectorXd> grid = {VectorXd::Zero(2), (VectorXd(2) << 1.0, 0.0).finished()};
  const auto freq = selection_frequency(model, tuning, grid, 20000, 13);
  REQUIRE(freq.zero_frequency.rows() == 2);
  REQUIRE(freq.zero_frequency.cols() == 2);
  CHECK(freq.solver_failures == 0);
  CHECK(freq.reps == 20000);

  // X'X = n I: beta_hat_j = 0 iff |n beta_j + (X'eps)_j| <= lambda,
  // (X'eps)_j ~ N(0, n)
  const double sd = std::sqrt(static_cast<double>(n));
  const double p_zero_at_0 = normal_cdf(lam / sd) - normal_cdf(-lam / sd);
  const double se = std::sqrt(0.25 / 20000.0);
  CHECK(std::abs(freq.zero_frequency(0, 0) - p_zero_at_0) < 4.0 * se);
  CHECK(std::abs(freq.zero_frequency(0, 1) - p_zero_at_0) < 4.0 * se);
  // at beta_1 = 1 the first coordinate is essentially never dropped
  const double p_zero_at_1 =
      normal_cdf((lam - n * 1.0) / sd) - normal_cdf((-lam - n * 1.0) / sd);
  CHECK(freq.zero_frequency(1, 0) < 0.005);
  CHECK(p_zero_at_1 < 0.005);  // the closed form agrees that this is rare
  CHECK(std::abs(freq.zero_frequency(1, 1) - p_zero_at_0) < 4.0 * se);
}
