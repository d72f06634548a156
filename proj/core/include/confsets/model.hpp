#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "confsets/errors.hpp"

namespace confsets {

/// Anything that enumerates all sign vectors refuses dimensions above this.
inline constexpr int kMaxSignDim = 20;

/// A fixed-design Gaussian regression instance: y = X beta + eps with
/// eps ~ N(0, sigma^2 I).  X must have full column rank; sigma is the known
/// noise standard deviation.
class LinearModel {
public:
  LinearModel(Eigen::MatrixXd X, Eigen::VectorXd y, double sigma);

  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }
  double sigma() const { return sigma_; }
  int n() const { return static_cast<int>(X_.rows()); }
  int p() const { return static_cast<int>(X_.cols()); }
  /// Ratio of largest to smallest singular value of X.
  double condition_number() const { return condition_number_; }

private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  double sigma_;
  double condition_number_;
};

/// sigma estimated from LS residuals with divisor (n - p).  Reports that use
/// it should be flagged as approximate; the coverage theory assumes sigma is
/// known.
double estimate_sigma(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// The scaled Gram matrix C = X'X/n (or a user-supplied limit matrix) with
/// its inverse and symmetric inverse square root, all computed once.
struct GramData {
  Eigen::MatrixXd C;
  Eigen::MatrixXd C_inv;
  Eigen::MatrixXd C_sqrt_inv;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;

  int p() const { return static_cast<int>(C.rows()); }

  /// Symmetrizes (tolerance 1e-10), eigendecomposes, and rejects matrices
  /// whose smallest eigenvalue falls below 1e-12 times the largest.
  static GramData from_matrix(const Eigen::MatrixXd& C_raw);
};

GramData gram_from_design(const LinearModel& model);

/// An element of {-1, +1}^p.
class SignVector {
public:
  explicit SignVector(Eigen::VectorXi d);

  /// Lexicographic enumeration with +1 ordered before -1: index 0 is all +1,
  /// index 2^p - 1 is all -1.
  static SignVector from_index(int p, std::uint64_t index);
  std::uint64_t to_index() const;

  int p() const { return static_cast<int>(d_.size()); }
  int operator[](int j) const { return d_[j]; }
  const Eigen::VectorXi& d() const { return d_; }
  Eigen::VectorXd as_doubles() const { return d_.cast<double>(); }
  SignVector negated() const { return SignVector(-d_); }

  bool operator==(const SignVector& other) const { return d_ == other.d_; }

private:
  Eigen::VectorXi d_;
};

/// All 2^p sign vectors in the from_index order.  Hard error beyond
/// kMaxSignDim: the minimal-coverage formula enumerates every sign vector,
/// so the dimension cap is intrinsic, not a tunable.
std::vector<SignVector> all_sign_vectors(int p);

enum class Regime { FiniteSample, ConservativeLimit, ConsistentLimit };

/// Per-coordinate penalty weights plus the scaling regime they live in.
///
/// FiniteSample(n):    lambda are the raw penalties at sample size n.
/// ConservativeLimit:  lambda is the limit of lambda_n / sqrt(n).
/// ConsistentLimit:    lambda holds the normalized weights lambda0 (max = 1)
///                     and lambda_star records the raw penalty scale
///                     lambda*_n at the sample size of interest.
class TuningVector {
public:
  static TuningVector finite_sample(Eigen::VectorXd lambda, long n);
  static TuningVector conservative(Eigen::VectorXd lambda);
  static TuningVector consistent(Eigen::VectorXd lambda0, double lambda_star);

  Regime regime() const { return regime_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  int p() const { return static_cast<int>(lambda_.size()); }

  long n() const;              // FiniteSample only
  double lambda_star() const;  // ConsistentLimit only
  const Eigen::VectorXd& lambda0() const;

private:
  TuningVector(Eigen::VectorXd lambda, Regime regime, long n, double lambda_star);

  Eigen::VectorXd lambda_;
  Regime regime_;
  long n_ = 0;
  double lambda_star_ = 0.0;
};

/// A vector over the extended reals: each entry is finite or carries only a
/// sign of infinity.  Stored as doubles, so +-inf entries are literal.
class ExtendedVector {
public:
  explicit ExtendedVector(Eigen::VectorXd v);

  static ExtendedVector all_infinite(const SignVector& d);

  int p() const { return static_cast<int>(v_.size()); }
  bool is_finite(int j) const { return std::isfinite(v_[j]); }
  /// Finite entry value; must not be called on infinite entries.
  double value(int j) const;
  /// +1 / -1 for infinite entries, 0 for finite ones.
  int inf_sign(int j) const;
  const Eigen::VectorXd& raw() const { return v_; }

private:
  Eigen::VectorXd v_;
};

/// Mean of the limiting Gaussian attached to sign vector d.
///
/// FiniteSample(n):    -n^{-1/2} C^{-1} Lambda d
/// ConservativeLimit:  +C^{-1} Lambda d
///
/// The two regimes carry opposite sign conventions.  Because d runs over all
/// sign vectors and the map d -> -d is a bijection, the *set* of means (and
/// hence any min over d) is identical either way; reports label which
/// convention was used.  ConsistentLimit has no shifted-mean Gaussian and is
/// rejected.
Eigen::VectorXd shifted_mean(const GramData& gram, const TuningVector& tuning,
                             const SignVector& d);

}  // namespace confsets
