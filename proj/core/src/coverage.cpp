#include "confsets/coverage.hpp"

#include <cmath>
#include <span>
#include <stdexcept>

#include "confsets/parallel.hpp"
#include "confsets/rng.hpp"
#include "confsets/special.hpp"

namespace confsets {

namespace {

// Even so antithetic pairs never straddle a chunk boundary.
constexpr std::size_t kMcChunk = 16384;

void require_regime_with_means(const TuningVector& tuning, const char* who) {
  if (tuning.regime() == Regime::ConsistentLimit)
    throw WrongRegimeError(std::string(who) +
                           ": needs the finite-sample or conservative-limit regime");
}

// Hit counts for every mean under common random numbers.  Sample i uses the
// draw of counter block i/2, negated for odd i (antithetic pairing); all
// means see the same perturbation.  Per-chunk integer counts are reduced in
// chunk order, so the result is independent of the thread schedule.
std::vector<std::size_t> mc_hit_counts(const ConfidenceShape& shape,
                                       const std::vector<Eigen::VectorXd>& means,
                                       const GramData& gram, double sigma,
                                       std::size_t n_samples, std::uint64_t seed) {
  const int p = gram.p();
  const std::size_t n_means = means.size();
  const Eigen::MatrixXd A = sigma * gram.C_sqrt_inv;

  const std::size_t n_chunks = chunk_count(n_samples, kMcChunk);
  std::vector<std::vector<std::uint32_t>> chunk_counts(
      n_chunks, std::vector<std::uint32_t>(n_means, 0));

  for_each_chunk(n_samples, kMcChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& counts = chunk_counts[c];
    Eigen::VectorXd xi(p), perturb(p), z(p);
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t block = i >> 1;
      normal_fill(seed, stream::kCoverage, block * static_cast<std::uint64_t>(p),
                  std::span<double>(xi.data(), static_cast<std::size_t>(p)));
      perturb.noalias() = A * xi;
      if (i & 1u) perturb = -perturb;
      for (std::size_t mi = 0; mi < n_means; ++mi) {
        z = means[mi] + perturb;
        if (shape_contains(shape, z)) ++counts[mi];
      }
    }
  });

  std::vector<std::size_t> total(n_means, 0);
  for (std::size_t c = 0; c < n_chunks; ++c)
    for (std::size_t mi = 0; mi < n_means; ++mi) total[mi] += chunk_counts[c][mi];
  return total;
}

}  // namespace

bool exact_coverage_applies(const ConfidenceShape& shape, const GramData& gram) {
  const Ellipse* e = std::get_if<Ellipse>(&shape);
  if (!e) return false;
  if (e->center.cwiseAbs().maxCoeff() != 0.0) return false;
  const double scale = std::max(1.0, gram.C.cwiseAbs().maxCoeff());
  return (e->C_shape - gram.C).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

MassEstimate gaussian_mass_mc(const ConfidenceShape& shape, const Eigen::VectorXd& mean,
                              const GramData& gram, double sigma, std::size_t n_samples,
                              std::uint64_t seed) {
  if (n_samples < 1000)
    throw std::invalid_argument("gaussian_mass_mc: n_samples must be >= 1000");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_mass_mc: sigma must be positive");
  if (mean.size() != gram.p() || shape_dim(shape) != gram.p())
    throw std::invalid_argument("gaussian_mass_mc: dimension mismatch");

  const auto counts = mc_hit_counts(shape, {mean}, gram, sigma, n_samples, seed);
  const double frac = static_cast<double>(counts[0]) / static_cast<double>(n_samples);
  MassEstimate est;
  est.probability = frac;
  est.std_error = std::sqrt(frac * (1.0 - frac) / static_cast<double>(n_samples));
  est.method = MassMethod::MonteCarlo;
  return est;
}

double ellipse_mass_exact(double k, double noncentrality, int p) {
  if (!(k > 0.0)) throw std::invalid_argument("ellipse_mass_exact: k must be positive");
  if (noncentrality < 0.0)
    throw std::invalid_argument("ellipse_mass_exact: noncentrality must be >= 0");
  if (p < 1) throw std::invalid_argument("ellipse_mass_exact: dimension must be >= 1");
  return noncentral_chi_square_cdf(k, static_cast<double>(p), noncentrality);
}

CoverageReport min_coverage(const ConfidenceShape& shape, const GramData& gram,
                            const TuningVector& tuning, double sigma, const McConfig& mc) {
  require_regime_with_means(tuning, "min_coverage");
  if (!(sigma > 0.0)) throw std::invalid_argument("min_coverage: sigma must be positive");
  if (gram.p() != tuning.p() || shape_dim(shape) != gram.p())
    throw std::invalid_argument("min_coverage: dimension mismatch");

  const auto signs = all_sign_vectors(gram.p());
  std::vector<Eigen::VectorXd> means;
  means.reserve(signs.size());
  for (const auto& d : signs) means.push_back(shifted_mean(gram, tuning, d));

  CoverageReport report;
  report.mean_sign_convention =
      tuning.regime() == Regime::FiniteSample ? "negative" : "positive";
  report.per_d.reserve(signs.size());

  if (exact_coverage_applies(shape, gram)) {
    const double k = std::get<Ellipse>(shape).k;
    const double s2 = sigma * sigma;
    std::vector<double> deltas(signs.size());
    for (std::size_t i = 0; i < signs.size(); ++i) {
      deltas[i] = means[i].dot(gram.C * means[i]) / s2;
      report.per_d.push_back(CoverageEntry{
          signs[i], ellipse_mass_exact(k / s2, deltas[i], gram.p()), 0.0, MassMethod::Exact});
    }
    report.method = MassMethod::Exact;
    report.seed = 0;
    report.n_samples = 0;
    report.min_coverage = report.per_d.front().probability;
    for (const auto& e : report.per_d)
      report.min_coverage = std::min(report.min_coverage, e.probability);
    // The CDF is strictly decreasing in the noncentrality, so the exact
    // argmin is the exact argmax of delta; ties by exact equality.
    double delta_max = deltas[0];
    for (double dlt : deltas) delta_max = std::max(delta_max, dlt);
    for (std::size_t i = 0; i < signs.size(); ++i)
      if (deltas[i] == delta_max) report.argmin_d.push_back(signs[i]);
    return report;
  }

  const std::uint64_t seed = mc.seed;
  const std::size_t n = mc.n_samples;
  if (n < 1000) throw std::invalid_argument("min_coverage: n_samples must be >= 1000");
  const auto counts = mc_hit_counts(shape, means, gram, sigma, n, seed);

  for (std::size_t i = 0; i < signs.size(); ++i) {
    const double prob = static_cast<double>(counts[i]) / static_cast<double>(n);
    const double se = std::sqrt(prob * (1.0 - prob) / static_cast<double>(n));
    report.per_d.push_back(CoverageEntry{signs[i], prob, se, MassMethod::MonteCarlo});
  }
  report.method = MassMethod::MonteCarlo;
  report.seed = seed;
  report.n_samples = n;
  std::size_t min_count = counts[0];
  for (std::size_t c : counts) min_count = std::min(min_count, c);
  report.min_coverage = static_cast<double>(min_count) / static_cast<double>(n);
  for (std::size_t i = 0; i < signs.size(); ++i)
    if (counts[i] == min_count) report.argmin_d.push_back(signs[i]);
  return report;
}

std::vector<SignVector> worst_case_d(const GramData& gram, const TuningVector& tuning) {
  require_regime_with_means(tuning, "worst_case_d");
  if (gram.p() != tuning.p()) throw std::invalid_argument("worst_case_d: dimension mismatch");

  const auto signs = all_sign_vectors(gram.p());
  std::vector<double> norms(signs.size());
  double best = -1.0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    const Eigen::VectorXd v =
        gram.C_sqrt_inv * tuning.lambda().cwiseProduct(signs[i].as_doubles());
    norms[i] = v.squaredNorm();
    best = std::max(best, norms[i]);
  }
  std::vector<SignVector> out;
  for (std::size_t i = 0; i < signs.size(); ++i)
    if (norms[i] == best) out.push_back(signs[i]);
  return out;
}

}  // namespace confsets
