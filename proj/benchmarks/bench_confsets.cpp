#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "confsets/coverage.hpp"
#include "confsets/lasso.hpp"
#include "confsets/model.hpp"
#include "confsets/rng.hpp"
#include "confsets/shapes.hpp"
#include "confsets/special.hpp"

using namespace confsets;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd paper_C() {
  MatrixXd C(2, 2);
  C << 1.0, -0.5, -0.5, 1.0;
  return C;
}

MatrixXd random_spd(SequentialRng& rng, int p) {
  MatrixXd A(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) A(i, j) = rng.normal();
  return A * A.transpose() + 0.3 * MatrixXd::Identity(p, p);
}

void BM_GramLassoSolve(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  SequentialRng rng(1, stream::kMisc);
  const GramLasso solver(random_spd(rng, p));
  VectorXd Xty(p), lambda(p);
  for (int j = 0; j < p; ++j) {
    Xty[j] = 4.0 * rng.normal();
    lambda[j] = 0.5 + rng.uniform();
  }
  for (auto _ : state) {
    auto result = solver.solve(Xty, lambda, VectorXd::Zero(p));
    benchmark::DoNotOptimize(result.beta);
  }
}
BENCHMARK(BM_GramLassoSolve)->Arg(2)->Arg(6)->Arg(12);

void BM_GaussianMassMc(benchmark::State& state) {
  const GramData g = GramData::from_matrix(paper_C());
  const Ellipse shape(g, 5.991464547107981);
  const VectorXd mean = VectorXd::Constant(2, 0.3);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto mass = gaussian_mass_mc(shape, mean, g, 1.0, n, 42);
    benchmark::DoNotOptimize(mass.probability);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_GaussianMassMc)->Arg(10000)->Arg(100000);

void BM_NoncentralChiSquareCdf(benchmark::State& state) {
  double x = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(noncentral_chi_square_cdf(x, 2.0, 7.5));
    x = (x < 40.0) ? x + 1e-3 : 2.0;
  }
}
BENCHMARK(BM_NoncentralChiSquareCdf);

std::vector<VectorXd> probe_points(const Box& box, std::size_t count) {
  std::vector<VectorXd> pts;
  pts.reserve(count);
  SequentialRng rng(7, stream::kMisc);
  const int p = static_cast<int>(box.lo.size());
  for (std::size_t i = 0; i < count; ++i) {
    VectorXd z(p);
    for (int j = 0; j < p; ++j)
      z[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * rng.uniform();
    pts.push_back(z);
  }
  return pts;
}

void BM_HullContainsPolygon(benchmark::State& state) {
  const GramData g = GramData::from_matrix(paper_C());
  const auto tuning = TuningVector::finite_sample(VectorXd::Constant(2, std::sqrt(5.0)), 20);
  const auto hull = make_hull(g, tuning, 4.68);
  const auto pts = probe_points(hull.box, 1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hull.contains(pts[i]));
    i = (i + 1) % pts.size();
  }
}
BENCHMARK(BM_HullContainsPolygon);

void BM_HullDirectionScan3d(benchmark::State& state) {
  SequentialRng rng(5, stream::kMisc);
  const GramData g = GramData::from_matrix(random_spd(rng, 3));
  const auto tuning = TuningVector::finite_sample(VectorXd::Constant(3, 2.0), 50);
  const auto hull = make_hull(g, tuning, 7.8);  // p = 3: no polygon shortcut
  const auto pts = probe_points(hull.box, 1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hull_membership(hull, pts[i]));
    i = (i + 1) % pts.size();
  }
}
BENCHMARK(BM_HullDirectionScan3d);

void BM_MinCoverageExact(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  SequentialRng rng(11, stream::kMisc);
  const GramData g = GramData::from_matrix(random_spd(rng, p));
  VectorXd lam(p);
  for (int j = 0; j < p; ++j) lam[j] = 1.0 + rng.uniform();
  const auto tuning = TuningVector::finite_sample(lam, 100);
  const Ellipse shape(g, chi_square_quantile(0.95, p));
  for (auto _ : state) {
    auto report = min_coverage(shape, g, tuning, 1.0);
    benchmark::DoNotOptimize(report.min_coverage);
  }
}
BENCHMARK(BM_MinCoverageExact)->Arg(2)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
