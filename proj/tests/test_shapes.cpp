#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "confsets/errors.hpp"
#include "confsets/model.hpp"
#include "confsets/rng.hpp"
#include "confsets/shapes.hpp"

using namespace confsets;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

MatrixXd worked_C() {
  MatrixXd C(2, 2);
  C << 1.0, -0.5, -0.5, 1.0;
  return C;
}

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

// shifts of the standard 2-d example: +-(1,1) and +-(1/3,-1/3)
std::vector<VectorXd> worked_shifts() {
  return {vec2(-1.0, -1.0), vec2(-1.0 / 3.0, 1.0 / 3.0), vec2(1.0 / 3.0, -1.0 / 3.0),
          vec2(1.0, 1.0)};
}

// membership by the raw halfplane system, no polygon shortcut
bool support_scan(const HullOfShiftedEllipses& hull, const VectorXd& z) {
  for (int i = 0; i < hull.n_directions(); ++i)
    if (hull.directions.row(i).dot(z) > hull.support[i]) return false;
  return true;
}

// signed distance-like margin: positive means some constraint is violated
double scan_margin(const HullOfShiftedEllipses& hull, const VectorXd& z) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < hull.n_directions(); ++i)
    worst = std::max(worst, hull.directions.row(i).dot(z) - hull.support[i]);
  return worst;
}

}  // namespace

TEST_CASE("orthant cone membership on the worked configuration") {
  const MatrixXd C = worked_C();
  const VectorXd m = vec2(1.5, 2.0);
  // C m = (0.5, 1.25)
  CHECK(((C * m) - vec2(0.5, 1.25)).cwiseAbs().maxCoeff() < 1e-15);

  const OrthantCone cone(C, SignVector::from_index(2, 3), m);  // d = (-1,-1)
  // membership: z >= 0 componentwise and C z <= C m componentwise
  CHECK(cone_contains(cone, vec2(0.0, 0.0)));
  CHECK(cone_contains(cone, m));  // apex, on the boundary of both conditions
  CHECK(cone_contains(cone, vec2(0.5, 1.0)));
  CHECK(!cone_contains(cone, vec2(3.0, 3.0)));    // violates C z <= C m
  CHECK(!cone_contains(cone, vec2(-0.1, 0.5)));   // violates the orthant half
  CHECK(!cone_contains(cone, vec2(0.5, -0.01)));

  // mirrored cone at -m with d = (+1,+1)
  const OrthantCone mirror(C, SignVector::from_index(2, 0), (-m).eval());
  CHECK(cone_contains(mirror, vec2(0.0, 0.0)));
  CHECK(cone_contains(mirror, (-m).eval()));
  CHECK(!cone_contains(mirror, vec2(-3.0, -3.0)));
}

TEST_CASE("ellipse membership and validation") {
  const GramData g = GramData::from_matrix(worked_C());
  const Ellipse e(g, 2.0);
  CHECK(e.contains(VectorXd::Zero(2)));
  // membership is the exact inequality z'Cz <= k, so probe just inside and
  // just outside the boundary point (sqrt(k / C_00), 0)
  CHECK(e.contains(vec2(std::sqrt(2.0) * (1.0 - 1e-9), 0.0)));
  CHECK(!e.contains(vec2(std::sqrt(2.0) + 1e-6, 0.0)));
  CHECK_THROWS_AS(Ellipse(worked_C(), 0.0, VectorXd::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(Ellipse(worked_C(), -1.0, VectorXd::Zero(2)), std::invalid_argument);
  MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(Ellipse(bad, 1.0, VectorXd::Zero(2)), SingularDesignError);

  const Ellipse shifted(worked_C(), 1.0, vec2(5.0, 5.0));
  CHECK(shifted.contains(vec2(5.0, 5.0)));
  CHECK(!shifted.contains(VectorXd::Zero(2)));
}

TEST_CASE("hull membership: polygon path equals the raw support scan") {
  const double k = 4.68;
  const HullOfShiftedEllipses hull = make_hull_from_shifts(worked_C(), k, worked_shifts());
  REQUIRE(hull.polygon_ok);

  const Box& box = hull.box;
  const VectorXd span = box.hi - box.lo;
  std::size_t idx = 0;
  for (int i = 0; i < 10000; ++i) {
    VectorXd z(2);
    for (int j = 0; j < 2; ++j)
      z[j] = box.lo[j] - 0.15 * span[j] + 1.3 * span[j] * uniform_at(17, stream::kMisc, idx++);
    CHECK(hull.contains(z) == support_scan(hull, z));
  }
  // probe the polygon's own vertices and edge midpoints as well; a vertex
  // sits on two support lines at once, so the two paths may flip verdicts
  // within floating-point rounding of the lines -- but only there
  for (std::size_t i = 0; i + 1 < hull.polygon.size(); ++i) {
    const Vector2d v = hull.polygon[i];
    const Vector2d mid = 0.5 * (hull.polygon[i] + hull.polygon[i + 1]);
    if (hull.contains(v) != support_scan(hull, v))
      CHECK(std::abs(scan_margin(hull, v)) < 1e-12);
    CHECK(hull.contains(mid) == support_scan(hull, mid));
    CHECK(hull.contains((1.000001 * v).eval()) == support_scan(hull, (1.000001 * v).eval()));
  }
  // free function is the same predicate
  CHECK(hull_membership(hull, vec2(0.0, 0.0)) == hull.contains(vec2(0.0, 0.0)));
}

TEST_CASE("hull membership is symmetric under negation") {
  const HullOfShiftedEllipses hull = make_hull_from_shifts(worked_C(), 4.68, worked_shifts());
  std::size_t idx = 0;
  for (int i = 0; i < 5000; ++i) {
    VectorXd z(2);
    for (int j = 0; j < 2; ++j) z[j] = 8.0 * (uniform_at(23, stream::kMisc, idx++) - 0.5);
    CHECK(hull.contains(z) == hull.contains((-z).eval()));
  }
}

TEST_CASE("hull contains each member ellipse and the centered one") {
  const double k = 4.68;
  const GramData g = GramData::from_matrix(worked_C());
  const HullOfShiftedEllipses hull = make_hull_from_shifts(worked_C(), k, worked_shifts());

  const MatrixXd C_sqrt_inv = g.C_sqrt_inv;
  for (const VectorXd& s : worked_shifts()) {
    for (int t = 0; t < 256; ++t) {
      const double th = 2.0 * std::numbers::pi * t / 256.0;
      // boundary point of the shifted ellipse {(z-s)'C(z-s) = k}
      const VectorXd z = s + std::sqrt(k) * (C_sqrt_inv * vec2(std::cos(th), std::sin(th)));
      CHECK(hull.contains(z));
    }
  }
  const Ellipse centered(g, k);
  for (int t = 0; t < 256; ++t) {
    const double th = 2.0 * std::numbers::pi * t / 256.0;
    const VectorXd z = std::sqrt(k) * (C_sqrt_inv * vec2(std::cos(th), std::sin(th)));
    CHECK(hull.contains(z));
  }
}

TEST_CASE("hull grows with k") {
  const HullOfShiftedEllipses small = make_hull_from_shifts(worked_C(), 3.0, worked_shifts());
  const HullOfShiftedEllipses big = make_hull_from_shifts(worked_C(), 5.0, worked_shifts());
  std::size_t idx = 0;
  for (int i = 0; i < 4000; ++i) {
    VectorXd z(2);
    for (int j = 0; j < 2; ++j) z[j] = 9.0 * (uniform_at(29, stream::kMisc, idx++) - 0.5);
    if (small.contains(z)) CHECK(big.contains(z));
  }
}

TEST_CASE("make_hull and make_hull_from_shifts build identical caches") {
  const GramData g = GramData::from_matrix(worked_C());
  const VectorXd lam = VectorXd::Constant(2, std::sqrt(5.0));
  const TuningVector tuning = TuningVector::finite_sample(lam, 20);
  const HullOfShiftedEllipses a = make_hull(g, tuning, 4.68);
  std::vector<VectorXd> shifts;
  for (const auto& d : all_sign_vectors(2)) shifts.push_back(shifted_mean(g, tuning, d));
  const HullOfShiftedEllipses b =
      make_hull_from_shifts(g.C, 4.68, shifts, a.n_directions(), a.tol);

  REQUIRE(a.n_directions() == b.n_directions());
  CHECK(a.support == b.support);  // bitwise: same inputs, same arithmetic
  CHECK(a.box.lo == b.box.lo);
  CHECK(a.box.hi == b.box.hi);
  REQUIRE(a.polygon.size() == b.polygon.size());
  for (std::size_t i = 0; i < a.polygon.size(); ++i) CHECK(a.polygon[i] == b.polygon[i]);
}

TEST_CASE("hull construction validation") {
  CHECK_THROWS_AS(make_hull_from_shifts(worked_C(), 0.0, worked_shifts()),
                  std::invalid_argument);
  // not closed under negation
  std::vector<VectorXd> open_shifts = {vec2(1.0, 1.0), vec2(0.5, 0.5)};
  CHECK_THROWS_AS(make_hull_from_shifts(worked_C(), 1.0, open_shifts), std::logic_error);
  CHECK_THROWS_AS(make_hull_from_shifts(worked_C(), 1.0, {}), std::invalid_argument);
  // direction budget below 2p
  CHECK_THROWS_AS(make_hull_from_shifts(worked_C(), 1.0, worked_shifts(), 3),
                  std::invalid_argument);
}

TEST_CASE("three-dimensional hull falls back to the direction scan") {
  MatrixXd C = MatrixXd::Identity(3, 3);
  C(0, 1) = C(1, 0) = 0.2;
  const GramData g = GramData::from_matrix(C);
  const TuningVector tuning = TuningVector::conservative(vec2(0.4, 0.7).homogeneous());
  const HullOfShiftedEllipses hull = make_hull(g, tuning, 2.0, 2048);
  CHECK(!hull.polygon_ok);
  CHECK(hull.contains(VectorXd::Zero(3)));
  for (const auto& d : all_sign_vectors(3)) CHECK(hull.contains(shifted_mean(g, tuning, d)));
  CHECK(!hull.contains(VectorXd::Constant(3, 50.0)));
  // negation symmetry survives in the scan path
  std::size_t idx = 0;
  for (int i = 0; i < 1000; ++i) {
    VectorXd z(3);
    for (int j = 0; j < 3; ++j) z[j] = 6.0 * (uniform_at(31, stream::kMisc, idx++) - 0.5);
    CHECK(hull.contains(z) == hull.contains((-z).eval()));
  }
}

TEST_CASE("parallelogram vertices and membership") {
  const GramData g = GramData::from_matrix(worked_C());
  const VectorXd bounds = vec2(1.0, 0.8);
  const double scale = 0.3;
  const Parallelogram par(g.C, bounds, scale);
  const auto verts = parallelogram_vertices(par);
  const auto signs = all_sign_vectors(2);
  REQUIRE(verts.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const VectorXd expected =
        scale * (g.C_inv * bounds.cwiseProduct(signs[i].as_doubles()));
    CHECK((verts[i] - expected).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(par.contains((0.999 * verts[i]).eval()));
    CHECK(!par.contains((1.001 * verts[i]).eval()));
  }
  CHECK(par.contains(VectorXd::Zero(2)));
  CHECK_THROWS_AS(Parallelogram(g.C, vec2(-1.0, 1.0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Parallelogram(g.C, bounds, 0.0), std::invalid_argument);
}

TEST_CASE("closure membership equals the cone-union reference") {
  const MatrixXd C = worked_C();
  std::vector<VectorXd> pts;
  std::size_t idx = 0;
  for (int i = 0; i < 8; ++i)
    pts.push_back(vec2(3.0 * (uniform_at(41, stream::kMisc, idx++) - 0.5),
                       3.0 * (uniform_at(41, stream::kMisc, idx++) - 0.5)));
  const PointCloudWithClosure closure = closure_condition_a(pts, C);

  const auto signs = all_sign_vectors(2);
  auto reference = [&](const VectorXd& z) {
    for (const VectorXd& m : pts)
      for (const auto& d : signs)
        if (cone_contains(OrthantCone(C, d, m), z)) return true;
    return false;
  };
  for (const VectorXd& m : pts) CHECK(closure.contains(m));
  for (int i = 0; i < 2000; ++i) {
    const VectorXd z = vec2(7.0 * (uniform_at(43, stream::kMisc, idx) - 0.5),
                            7.0 * (uniform_at(43, stream::kMisc, idx + 1) - 0.5));
    idx += 2;
    CHECK(closure.contains(z) == reference(z));
  }
}

TEST_CASE("closure membership reference in three dimensions") {
  MatrixXd C = MatrixXd::Identity(3, 3);
  C(0, 1) = C(1, 0) = -0.3;
  C(1, 2) = C(2, 1) = 0.25;
  std::vector<VectorXd> pts;
  std::size_t idx = 0;
  for (int i = 0; i < 6; ++i) {
    VectorXd m(3);
    for (int j = 0; j < 3; ++j) m[j] = 2.5 * (uniform_at(47, stream::kMisc, idx++) - 0.5);
    pts.push_back(m);
  }
  const PointCloudWithClosure closure = closure_condition_a(pts, C);
  const auto signs = all_sign_vectors(3);
  for (int i = 0; i < 800; ++i) {
    VectorXd z(3);
    for (int j = 0; j < 3; ++j) z[j] = 6.0 * (uniform_at(53, stream::kMisc, idx++) - 0.5);
    bool ref = false;
    for (const VectorXd& m : pts) {
      for (const auto& d : signs)
        if (cone_contains(OrthantCone(C, d, m), z)) {
          ref = true;
          break;
        }
      if (ref) break;
    }
    CHECK(closure.contains(z) == ref);
  }
}

TEST_CASE("closure is idempotent") {
  const MatrixXd C = worked_C();
  std::vector<VectorXd> pts = {vec2(1.0, 0.2), vec2(-0.5, 0.8), vec2(0.3, -1.1)};
  const PointCloudWithClosure once = closure_condition_a(pts, C);

  // adjoin confirmed members and close again; membership must not grow
  std::vector<VectorXd> enlarged = pts;
  std::size_t idx = 0;
  while (enlarged.size() < pts.size() + 12) {
    const VectorXd z = vec2(6.0 * (uniform_at(59, stream::kMisc, idx) - 0.5),
                            6.0 * (uniform_at(59, stream::kMisc, idx + 1) - 0.5));
    idx += 2;
    if (once.contains(z)) enlarged.push_back(z);
  }
  const PointCloudWithClosure twice = closure_condition_a(enlarged, C);
  for (int i = 0; i < 3000; ++i) {
    const VectorXd z = vec2(8.0 * (uniform_at(61, stream::kMisc, idx) - 0.5),
                            8.0 * (uniform_at(61, stream::kMisc, idx + 1) - 0.5));
    idx += 2;
    CHECK(once.contains(z) == twice.contains(z));
  }
}

TEST_CASE("cone condition holds on gram ellipses") {
  std::size_t idx = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const int p = 2 + trial % 2;
    MatrixXd A(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) A(i, j) = normal_at(67, stream::kMisc, idx++);
    const MatrixXd C = A * A.transpose() + 0.4 * MatrixXd::Identity(p, p);
    const GramData g = GramData::from_matrix(C);
    const double k = 0.7 + trial;
    const ConfidenceShape shape = Ellipse(g, k);
    const auto res = check_condition_a(shape, g.C, 2000, 100 + trial);
    CHECK(res.holds);
    CHECK(!res.counterexample.has_value());
    CHECK(res.cone_point_count > 0);
    CHECK(res.m_count > 0);
  }
}

TEST_CASE("cone condition check certifies a violation when the matrices disagree") {
  const GramData g = GramData::from_matrix(worked_C());
  const ConfidenceShape shape = Parallelogram(g.C, vec2(1.0, 1.0), 1.0);
  MatrixXd C_bar(2, 2);
  C_bar << 4.0, -1.5, -1.5, 1.0;
  const auto res = check_condition_a(shape, C_bar, 4000, 7);
  REQUIRE(!res.holds);
  REQUIRE(res.counterexample.has_value());
  const auto& ce = *res.counterexample;
  // the certificate must be verifiable from scratch
  CHECK(shape_contains(shape, ce.m));
  CHECK(cone_contains(OrthantCone(C_bar, ce.d, ce.m), ce.z));
  CHECK(!shape_contains(shape, ce.z));
}

TEST_CASE("Monte Carlo volume matches closed forms") {
  const GramData g = GramData::from_matrix(worked_C());
  const double det = g.C.determinant();

  {
    const double k = 2.0;
    const auto est = mc_volume(Ellipse(g, k), 200000, 1);
    const double exact = std::numbers::pi * k / std::sqrt(det);
    CHECK(std::abs(est.volume - exact) < 4.0 * est.std_error);
    CHECK(est.std_error > 0.0);
    CHECK(est.n_samples == 200000);
  }
  {
    const GramData id3 = GramData::from_matrix(MatrixXd::Identity(3, 3));
    const double k = 1.7;
    const auto est = mc_volume(Ellipse(id3, k), 200000, 2);
    const double exact = 4.0 / 3.0 * std::numbers::pi * std::pow(k, 1.5);
    CHECK(std::abs(est.volume - exact) < 4.0 * est.std_error);
  }
  {
    // parallelogram is the C^{-1} image of a box: area 4 b1 b2 scale^2 / det
    const VectorXd bounds = vec2(1.0, 0.8);
    const auto est = mc_volume(Parallelogram(g.C, bounds, 0.7), 200000, 3);
    const double exact = 4.0 * bounds[0] * bounds[1] * 0.7 * 0.7 / det;
    CHECK(std::abs(est.volume - exact) < 4.0 * est.std_error);
  }
}

TEST_CASE("paired volume difference with common draws") {
  const GramData g = GramData::from_matrix(worked_C());
  const Ellipse small(g, 2.0), big(g, 2.5);
  const auto diff = mc_volume_difference(big, small, 400000, 5);
  const double exact = std::numbers::pi * 0.5 / std::sqrt(g.C.determinant());
  CHECK(std::abs(diff.difference - exact) < 4.0 * diff.std_error);
  // nested shapes under common draws: the difference is far tighter than
  // the two independent volume errors combined
  const auto va = mc_volume(big, 400000, 5);
  const auto vb = mc_volume(small, 400000, 5);
  CHECK(diff.std_error < std::sqrt(va.std_error * va.std_error + vb.std_error * vb.std_error));
  CHECK(diff.volume_a > diff.volume_b);
}

TEST_CASE("deterministic interior sampling") {
  const GramData g = GramData::from_matrix(worked_C());
  const ConfidenceShape shape = Ellipse(g, 2.0);
  const auto s1 = sample_interior(shape, 500, 11);
  const auto s2 = sample_interior(shape, 500, 11);
  REQUIRE(s1.size() == 500);
  REQUIRE(s2.size() == 500);
  for (std::size_t i = 0; i < 500; ++i) {
    CHECK(shape_contains(shape, s1[i]));
    CHECK(s1[i] == s2[i]);
  }
}

TEST_CASE("bounding boxes") {
  const GramData g = GramData::from_matrix(worked_C());
  const double k = 2.0;
  const Box eb = bounding_box(Ellipse(g, k));
  for (int j = 0; j < 2; ++j) {
    CHECK(eb.hi[j] == doctest::Approx(std::sqrt(k * g.C_inv(j, j))).epsilon(1e-12));
    CHECK(eb.lo[j] == doctest::Approx(-std::sqrt(k * g.C_inv(j, j))).epsilon(1e-12));
  }
  const HullOfShiftedEllipses hull = make_hull_from_shifts(g.C, k, worked_shifts());
  const Box hb = bounding_box(ConfidenceShape(hull));
  // hull box = shift extremes plus the ellipse half-width
  for (int j = 0; j < 2; ++j)
    CHECK(hb.hi[j] == doctest::Approx(1.0 + std::sqrt(k * g.C_inv(j, j))).epsilon(1e-9));
  CHECK(shape_dim(ConfidenceShape(hull)) == 2);
}

TEST_CASE("boundary polylines satisfy their defining equations") {
  const GramData g = GramData::from_matrix(worked_C());
  const Ellipse e(g.C, 2.0, vec2(0.3, -0.2));
  const auto eb = ellipse_boundary(e, 256);
  REQUIRE(eb.size() == 257);
  CHECK(eb.front() == eb.back());
  for (const auto& pt : eb) {
    const VectorXd w = VectorXd(pt) - e.center;
    CHECK(w.dot(e.C_shape * w) == doctest::Approx(2.0).epsilon(1e-9));
  }

  const Parallelogram par(g.C, vec2(1.0, 0.8), 0.5);
  const auto pb = parallelogram_boundary(par);
  REQUIRE(pb.size() == 5);
  CHECK(pb.front() == pb.back());
  for (std::size_t i = 0; i + 1 < pb.size(); ++i) {
    const VectorXd cz = g.C * VectorXd(pb[i]);
    const double worst =
        std::max(std::abs(cz[0]) / (0.5 * 1.0), std::abs(cz[1]) / (0.5 * 0.8));
    CHECK(worst == doctest::Approx(1.0).epsilon(1e-10));
  }

  const HullOfShiftedEllipses hull = make_hull_from_shifts(g.C, 4.68, worked_shifts());
  const auto hbnd = hull_boundary(hull);
  REQUIRE(hbnd.size() >= 4);
  CHECK(hbnd.front() == hbnd.back());
  for (const auto& pt : hbnd) {
    CHECK(hull.contains(VectorXd((1.0 - 1e-6) * pt)));     // just inside the vertex
    CHECK(!hull.contains(VectorXd(1.01 * pt)));            // inflating leaves the hull
  }
}
