#include "confsets/lasso.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace confsets {

namespace {

inline double soft_threshold(double u, double lambda) {
  if (u > lambda) return u - lambda;
  if (u < -lambda) return u + lambda;
  return 0.0;  // literal zero so selection events are exact
}

// Worst violation of the subgradient conditions given g = Xty - XtX beta:
// |g_j| <= lambda_j when beta_j = 0, g_j = lambda_j sgn(beta_j) otherwise.
double kkt_violation(const Eigen::VectorXd& g, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& lambda, Eigen::VectorXd* per_coord) {
  double worst = 0.0;
  for (int j = 0; j < beta.size(); ++j) {
    double v;
    if (beta[j] == 0.0)
      v = std::max(0.0, std::abs(g[j]) - lambda[j]);
    else
      v = std::abs(g[j] - lambda[j] * (beta[j] > 0.0 ? 1.0 : -1.0));
    if (per_coord) (*per_coord)[j] = v;
    if (v > worst) worst = v;
  }
  return worst;
}

}  // namespace

GramLasso::GramLasso(Eigen::MatrixXd XtX) : XtX_(std::move(XtX)) {
  if (XtX_.rows() != XtX_.cols() || XtX_.rows() < 1)
    throw std::invalid_argument("GramLasso: XtX must be square");
  diag_ = XtX_.diagonal();
  for (int j = 0; j < diag_.size(); ++j)
    if (!(diag_[j] > 0.0))
      throw SingularDesignError("GramLasso: zero diagonal in X'X (empty column)");
  ldlt_.compute(XtX_);
  if (ldlt_.info() != Eigen::Success)
    throw SingularDesignError("GramLasso: X'X factorization failed");
}

GramLasso::Result GramLasso::solve(const Eigen::VectorXd& Xty, const Eigen::VectorXd& lambda,
                                   Eigen::VectorXd start, int max_sweeps) const {
  const int p = static_cast<int>(XtX_.rows());
  if (Xty.size() != p || lambda.size() != p || start.size() != p)
    throw std::invalid_argument("GramLasso: dimension mismatch");

  Result res;
  res.tolerance = 1e-8 * std::max(1.0, Xty.cwiseAbs().maxCoeff());
  Eigen::VectorXd& beta = start;
  // g tracks the residual correlation X'(y - X beta) across updates; it is
  // refreshed from scratch at every convergence check so incremental drift
  // cannot accumulate.
  Eigen::VectorXd g = Xty - XtX_ * beta;
  res.kkt_gap.resize(p);

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int j = 0; j < p; ++j) {
      const double u = g[j] + diag_[j] * beta[j];
      const double nb = soft_threshold(u, lambda[j]) / diag_[j];
      const double delta = nb - beta[j];
      if (delta != 0.0) {
        g.noalias() -= XtX_.col(j) * delta;
        beta[j] = nb;
      }
    }
    g.noalias() = Xty - XtX_ * beta;
    const double worst = kkt_violation(g, beta, lambda, &res.kkt_gap);
    if (worst <= res.tolerance) {
      res.beta = std::move(beta);
      res.sweeps = sweep;
      return res;
    }
  }
  throw NonConvergenceError("GramLasso: no convergence after " + std::to_string(max_sweeps) +
                            " sweeps (tolerance " + std::to_string(res.tolerance) + ")");
}

Eigen::VectorXd solve_ls(const LinearModel& model) {
  Eigen::VectorXd beta = model.X().colPivHouseholderQr().solve(model.y());
  const Eigen::VectorXd Xty = model.X().transpose() * model.y();
  const Eigen::VectorXd resid_corr = Xty - model.X().transpose() * (model.X() * beta);
  if (resid_corr.norm() > 1e-8 * std::max(1.0, Xty.norm()))
    throw SingularDesignError("solve_ls: normal equations violated; design ill-conditioned");
  return beta;
}

LassoSolution solve_lasso(const LinearModel& model, const TuningVector& tuning, int max_sweeps) {
  if (tuning.regime() != Regime::FiniteSample)
    throw WrongRegimeError("solve_lasso: data-level fits require finite-sample tuning");
  if (tuning.p() != model.p())
    throw std::invalid_argument("solve_lasso: lambda dimension mismatch");

  GramLasso core(model.X().transpose() * model.X());
  const Eigen::VectorXd Xty = model.X().transpose() * model.y();
  auto r = core.solve(Xty, tuning.lambda(), core.least_squares(Xty), max_sweeps);

  LassoSolution sol;
  sol.beta_hat = std::move(r.beta);
  sol.kkt_gap = std::move(r.kkt_gap);
  sol.iterations = r.sweeps;
  sol.tolerance = r.tolerance;
  sol.active_set.resize(sol.beta_hat.size());
  for (int j = 0; j < sol.beta_hat.size(); ++j) sol.active_set[j] = sol.beta_hat[j] != 0.0;
  sol.objective_value = (model.y() - model.X() * sol.beta_hat).squaredNorm() +
                        2.0 * tuning.lambda().dot(sol.beta_hat.cwiseAbs());
  return sol;
}

Eigen::VectorXd ls_lasso_gap(const LinearModel& model, const TuningVector& tuning,
                             const LassoSolution& sol) {
  (void)tuning;
  const Eigen::VectorXd beta_ls = solve_ls(model);
  return ((model.X().transpose() * model.X()) * (sol.beta_hat - beta_ls)).cwiseAbs();
}

}  // namespace confsets
