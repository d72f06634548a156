#include "confsets/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace confsets {

LinearModel::LinearModel(Eigen::MatrixXd X, Eigen::VectorXd y, double sigma)
    : X_(std::move(X)), y_(std::move(y)), sigma_(sigma) {
  const auto n = X_.rows();
  const auto p = X_.cols();
  if (p < 1 || n < p)
    throw std::invalid_argument("LinearModel: need n >= p >= 1, got n=" + std::to_string(n) +
                                ", p=" + std::to_string(p));
  if (y_.size() != n)
    throw std::invalid_argument("LinearModel: y has length " + std::to_string(y_.size()) +
                                ", expected " + std::to_string(n));
  if (!X_.allFinite() || !y_.allFinite())
    throw std::invalid_argument("LinearModel: X and y must be finite");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_))
    throw std::invalid_argument("LinearModel: sigma must be positive and finite");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X_);
  const auto& sv = svd.singularValues();
  const double s_max = sv(0);
  const double s_min = sv(sv.size() - 1);
  if (!(s_min > 1e-12 * s_max))
    throw SingularDesignError("LinearModel: design is rank deficient (singular values " +
                              std::to_string(s_max) + " .. " + std::to_string(s_min) + ")");
  condition_number_ = s_max / s_min;
}

double estimate_sigma(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (n <= p)
    throw std::invalid_argument("estimate_sigma: need n > p for the (n - p) divisor");
  Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  const double rss = (y - X * beta).squaredNorm();
  return std::sqrt(rss / static_cast<double>(n - p));
}

GramData GramData::from_matrix(const Eigen::MatrixXd& C_raw) {
  if (C_raw.rows() != C_raw.cols() || C_raw.rows() < 1)
    throw std::invalid_argument("GramData: matrix must be square and nonempty");
  const double scale = std::max(1.0, C_raw.cwiseAbs().maxCoeff());
  if ((C_raw - C_raw.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("GramData: matrix is not symmetric within 1e-10");

  GramData g;
  g.C = 0.5 * (C_raw + C_raw.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.C);
  if (eig.info() != Eigen::Success)
    throw SingularDesignError("GramData: eigendecomposition failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  g.min_eigenvalue = ev(0);
  g.max_eigenvalue = ev(ev.size() - 1);
  if (!(g.min_eigenvalue > 1e-12 * g.max_eigenvalue) || !(g.max_eigenvalue > 0.0))
    throw SingularDesignError("GramData: matrix is singular or near-singular (eigenvalues " +
                              std::to_string(g.min_eigenvalue) + " .. " +
                              std::to_string(g.max_eigenvalue) + ")");

  const Eigen::MatrixXd& V = eig.eigenvectors();
  g.C_inv = V * ev.cwiseInverse().asDiagonal() * V.transpose();
  g.C_sqrt_inv = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();

  const auto p = g.C.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
  if ((g.C * g.C_inv - I).cwiseAbs().maxCoeff() > 1e-8 ||
      (g.C_sqrt_inv * g.C * g.C_sqrt_inv - I).cwiseAbs().maxCoeff() > 1e-8)
    throw SingularDesignError("GramData: inverse round-trip exceeded 1e-8; matrix too ill-conditioned");
  return g;
}

GramData gram_from_design(const LinearModel& model) {
  const Eigen::MatrixXd C =
      (model.X().transpose() * model.X()) / static_cast<double>(model.n());
  return GramData::from_matrix(C);
}

SignVector::SignVector(Eigen::VectorXi d) : d_(std::move(d)) {
  if (d_.size() < 1) throw std::invalid_argument("SignVector: empty");
  for (int j = 0; j < d_.size(); ++j)
    if (d_[j] != 1 && d_[j] != -1)
      throw std::invalid_argument("SignVector: entries must be exactly +1 or -1");
}

SignVector SignVector::from_index(int p, std::uint64_t index) {
  if (p < 1 || p > kMaxSignDim)
    throw std::invalid_argument("SignVector: dimension must be in [1, " +
                                std::to_string(kMaxSignDim) + "]");
  if (index >= (std::uint64_t{1} << p))
    throw std::invalid_argument("SignVector: index out of range");
  Eigen::VectorXi d(p);
  for (int j = 0; j < p; ++j)
    d[j] = (index >> (p - 1 - j)) & 1u ? -1 : 1;
  return SignVector(std::move(d));
}

std::uint64_t SignVector::to_index() const {
  std::uint64_t idx = 0;
  const int pp = p();
  for (int j = 0; j < pp; ++j)
    if (d_[j] == -1) idx |= std::uint64_t{1} << (pp - 1 - j);
  return idx;
}

std::vector<SignVector> all_sign_vectors(int p) {
  if (p < 1 || p > kMaxSignDim)
    throw std::invalid_argument(
        "all_sign_vectors: enumerating 2^p sign vectors requires 1 <= p <= " +
        std::to_string(kMaxSignDim) + ", got p=" + std::to_string(p));
  std::vector<SignVector> out;
  out.reserve(std::size_t{1} << p);
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << p); ++i)
    out.push_back(SignVector::from_index(p, i));
  return out;
}

TuningVector::TuningVector(Eigen::VectorXd lambda, Regime regime, long n, double lambda_star)
    : lambda_(std::move(lambda)), regime_(regime), n_(n), lambda_star_(lambda_star) {
  if (lambda_.size() < 1) throw std::invalid_argument("TuningVector: empty lambda");
  for (int j = 0; j < lambda_.size(); ++j)
    if (!(lambda_[j] >= 0.0) || !std::isfinite(lambda_[j]))
      throw std::invalid_argument("TuningVector: lambda entries must be finite and >= 0");
}

TuningVector TuningVector::finite_sample(Eigen::VectorXd lambda, long n) {
  if (n < 1) throw std::invalid_argument("TuningVector: sample size must be >= 1");
  return TuningVector(std::move(lambda), Regime::FiniteSample, n, 0.0);
}

TuningVector TuningVector::conservative(Eigen::VectorXd lambda) {
  return TuningVector(std::move(lambda), Regime::ConservativeLimit, 0, 0.0);
}

TuningVector TuningVector::consistent(Eigen::VectorXd lambda0, double lambda_star) {
  if (!(lambda_star > 0.0) || !std::isfinite(lambda_star))
    throw std::invalid_argument("TuningVector: lambda_star must be positive");
  TuningVector t(std::move(lambda0), Regime::ConsistentLimit, 0, lambda_star);
  double max0 = t.lambda_.maxCoeff();
  if (std::abs(max0 - 1.0) > 1e-12)
    throw std::invalid_argument(
        "TuningVector: normalized weights must attain max = 1 (lambda* carries the scale)");
  if (t.lambda_.maxCoeff() > 1.0 + 1e-12 || t.lambda_.minCoeff() < 0.0)
    throw std::invalid_argument("TuningVector: normalized weights must lie in [0,1]");
  return t;
}

long TuningVector::n() const {
  if (regime_ != Regime::FiniteSample)
    throw WrongRegimeError("TuningVector: sample size is only defined in the finite-sample regime");
  return n_;
}

double TuningVector::lambda_star() const {
  if (regime_ != Regime::ConsistentLimit)
    throw WrongRegimeError("TuningVector: lambda_star is only defined in the consistent regime");
  return lambda_star_;
}

const Eigen::VectorXd& TuningVector::lambda0() const {
  if (regime_ != Regime::ConsistentLimit)
    throw WrongRegimeError("TuningVector: lambda0 is only defined in the consistent regime");
  return lambda_;
}

ExtendedVector::ExtendedVector(Eigen::VectorXd v) : v_(std::move(v)) {
  if (v_.size() < 1) throw std::invalid_argument("ExtendedVector: empty");
  for (int j = 0; j < v_.size(); ++j)
    if (std::isnan(v_[j])) throw std::invalid_argument("ExtendedVector: NaN entry");
}

ExtendedVector ExtendedVector::all_infinite(const SignVector& d) {
  Eigen::VectorXd v(d.p());
  for (int j = 0; j < d.p(); ++j)
    v[j] = d[j] * std::numeric_limits<double>::infinity();
  return ExtendedVector(std::move(v));
}

double ExtendedVector::value(int j) const {
  if (!is_finite(j)) throw std::logic_error("ExtendedVector: entry is infinite");
  return v_[j];
}

int ExtendedVector::inf_sign(int j) const {
  if (is_finite(j)) return 0;
  return v_[j] > 0 ? 1 : -1;
}

Eigen::VectorXd shifted_mean(const GramData& gram, const TuningVector& tuning,
                             const SignVector& d) {
  if (gram.p() != tuning.p() || gram.p() != d.p())
    throw std::invalid_argument("shifted_mean: dimension mismatch");
  const Eigen::VectorXd lam_d = tuning.lambda().cwiseProduct(d.as_doubles());
  switch (tuning.regime()) {
    case Regime::FiniteSample:
      return (-1.0 / std::sqrt(static_cast<double>(tuning.n()))) * (gram.C_inv * lam_d);
    case Regime::ConservativeLimit:
      return gram.C_inv * lam_d;
    case Regime::ConsistentLimit:
      throw WrongRegimeError(
          "shifted_mean: the consistent regime has a deterministic limit set, not a "
          "shifted Gaussian");
  }
  throw std::logic_error("shifted_mean: unreachable");
}

}  // namespace confsets
