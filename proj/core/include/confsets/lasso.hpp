#pragma once

#include <Eigen/Dense>

#include "confsets/model.hpp"

namespace confsets {

/// Converged Lasso fit.  Inactive coordinates are literal zeros: the
/// soft-threshold update clamps, so selection events {beta_hat_j = 0} are
/// exact rather than "small".
struct LassoSolution {
  Eigen::VectorXd beta_hat;
  std::vector<bool> active_set;  // true where beta_hat_j != 0
  Eigen::VectorXd kkt_gap;       // per-coordinate subgradient violation
  int iterations = 0;            // full coordinate sweeps
  double objective_value = 0.0;  // ||y - X beta||^2 + 2 sum lambda_j |beta_j|
  double tolerance = 0.0;        // convergence threshold actually used
};

/// Least squares via column-pivoted QR; verifies the normal equations
/// X'(y - X beta) = 0 within 1e-8 * ||X'y||.
Eigen::VectorXd solve_ls(const LinearModel& model);

/// Cyclic coordinate descent on ||y - X beta||^2 + 2 sum_j lambda_j |beta_j|
/// (note the factor 2 on the penalty), warm-started at the LS solution.
/// Converged when the worst subgradient violation drops to
/// 1e-8 * max(1, ||X'y||_inf).  Requires the finite-sample regime.
LassoSolution solve_lasso(const LinearModel& model, const TuningVector& tuning,
                          int max_sweeps = 100000);

/// g_j = |(X'X (beta_L - beta_LS))_j|.  At any converged solution this is
/// bounded by lambda_j: the KKT conditions pin the correlation X'(y - X beta)
/// inside the box [-lambda, lambda] and the LS residual correlation is zero.
Eigen::VectorXd ls_lasso_gap(const LinearModel& model, const TuningVector& tuning,
                             const LassoSolution& sol);

/// Solver core working on sufficient statistics (X'X, X'y) only.  Simulation
/// loops reuse one instance across many responses; the factorization of X'X
/// provides LS warm starts without touching X.
class GramLasso {
public:
  explicit GramLasso(Eigen::MatrixXd XtX);

  struct Result {
    Eigen::VectorXd beta;
    Eigen::VectorXd kkt_gap;
    int sweeps = 0;
    double tolerance = 0.0;
  };

  /// Minimizes beta' XtX beta - 2 Xty' beta + 2 sum lambda_j |beta_j| from
  /// the given starting point.  Throws NonConvergenceError past max_sweeps.
  Result solve(const Eigen::VectorXd& Xty, const Eigen::VectorXd& lambda,
               Eigen::VectorXd start, int max_sweeps = 100000) const;

  /// LS coefficients for a response with statistics Xty.
  Eigen::VectorXd least_squares(const Eigen::VectorXd& Xty) const {
    return ldlt_.solve(Xty);
  }

  const Eigen::MatrixXd& XtX() const { return XtX_; }

private:
  Eigen::MatrixXd XtX_;
  Eigen::VectorXd diag_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

}  // namespace confsets
