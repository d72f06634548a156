#include "confsets/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "confsets/rng.hpp"
#include "confsets/special.hpp"

namespace confsets {

namespace {

void require_dim(int have, int want, const char* who) {
  if (have != want) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29,
                                31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

OrthantCone::OrthantCone(Eigen::MatrixXd C_bar_, SignVector d_, Eigen::VectorXd apex_)
    : C_bar(std::move(C_bar_)), d(std::move(d_)), apex(std::move(apex_)) {
  if (C_bar.rows() != C_bar.cols() || C_bar.rows() != d.p() || apex.size() != d.p())
    throw std::invalid_argument("OrthantCone: dimension mismatch");
}

bool cone_contains(const OrthantCone& cone, const Eigen::VectorXd& z) {
  require_dim(static_cast<int>(z.size()), cone.d.p(), "cone_contains");
  const Eigen::VectorXd cz = cone.C_bar * z;
  const Eigen::VectorXd cm = cone.C_bar * cone.apex;
  for (int j = 0; j < cone.d.p(); ++j) {
    const double dj = cone.d[j];
    if (!(dj * z[j] <= 0.0)) return false;
    if (!(dj * cz[j] >= dj * cm[j])) return false;
  }
  return true;
}

Ellipse::Ellipse(Eigen::MatrixXd C_shape_, double k_, Eigen::VectorXd center_)
    : C_shape(std::move(C_shape_)), k(k_), center(std::move(center_)) {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("Ellipse: k must be positive");
  if (center.size() != C_shape.rows())
    throw std::invalid_argument("Ellipse: center dimension mismatch");
  const GramData g = GramData::from_matrix(C_shape);  // validates SPD
  C_shape = g.C;
  C_inv = g.C_inv;
  C_sqrt_inv = g.C_sqrt_inv;
}

Ellipse::Ellipse(const GramData& gram, double k_)
    : Ellipse(gram.C, k_, Eigen::VectorXd::Zero(gram.p())) {}

namespace {

Eigen::MatrixXd default_directions(int p, int n_directions) {
  if (p == 2) {
    const int n = n_directions > 0 ? n_directions : 720;
    Eigen::MatrixXd dir(n, 2);
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * std::numbers::pi * i / n;
      dir(i, 0) = std::cos(th);
      dir(i, 1) = std::sin(th);
    }
    return dir;
  }
  // Antipodal pairs: the hull is symmetric under negation (the shifts come
  // in +- pairs), and a direction grid closed under exact negation makes the
  // membership verdict symmetric too.  Odd requests are rounded up.
  const int requested = n_directions > 0 ? n_directions : 10000;
  const int half = (requested + 1) / 2;
  Eigen::MatrixXd dir(2 * half, p);
  for (int i = 0; i < half; ++i) {
    Eigen::VectorXd g(p);
    for (int j = 0; j < p; ++j) g[j] = normal_quantile(halton(i + 1, kPrimes[j]));
    const double nrm = g.norm();
    if (nrm < 1e-12) g = Eigen::VectorXd::Unit(p, 0);
    else g /= nrm;
    dir.row(2 * i) = g.transpose();
    dir.row(2 * i + 1) = -g.transpose();
  }
  return dir;
}

// Circumscribed polygon of the halfplane system {v_i . z <= support_i} for
// p = 2; vertex i is the intersection of consecutive constraint lines, and
// the edge between vertices i-1 and i lies on line i.  Point-in-polygon by
// angular sector lookup then evaluates exactly one original constraint, so
// it accepts exactly the same set as the full scan.
void build_polygon(HullOfShiftedEllipses& hull) {
  const int n = hull.n_directions();
  if (hull.p() != 2 || n < 8) return;
  hull.polygon.resize(n);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const double a11 = hull.directions(i, 0), a12 = hull.directions(i, 1);
    const double a21 = hull.directions(j, 0), a22 = hull.directions(j, 1);
    const double det = a11 * a22 - a12 * a21;
    if (std::abs(det) < 1e-12) return;  // parallel constraints; keep scan path
    const double b1 = hull.support[i], b2 = hull.support[j];
    hull.polygon[i] = {(b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det};
  }
  // Vertex angles must be circularly strictly increasing for sector lookup.
  std::vector<double> ang(n);
  for (int i = 0; i < n; ++i) ang[i] = std::atan2(hull.polygon[i].y(), hull.polygon[i].x());
  int start = 0;
  for (int i = 1; i < n; ++i)
    if (ang[i] < ang[start]) start = i;
  std::vector<Eigen::Vector2d> rot(n);
  std::vector<double> rang(n);
  for (int r = 0; r < n; ++r) {
    rot[r] = hull.polygon[(start + r) % n];
    rang[r] = ang[(start + r) % n];
  }
  for (int r = 1; r < n; ++r)
    if (!(rang[r] > rang[r - 1])) return;  // degenerate ordering; keep scan path
  hull.polygon = std::move(rot);
  hull.polygon_angle = std::move(rang);
  hull.polygon_start = start;
  hull.polygon_ok = true;
}

}  // namespace

bool HullOfShiftedEllipses::contains(const Eigen::VectorXd& z) const {
  require_dim(static_cast<int>(z.size()), p(), "HullOfShiftedEllipses");
  if (polygon_ok) {
    const int n = n_directions();
    const double phi = std::atan2(z[1], z[0]);
    // r = last rotated vertex with angle <= phi; wrap otherwise.
    int r;
    if (phi < polygon_angle.front() || phi >= polygon_angle.back()) {
      r = n - 1;
    } else {
      r = static_cast<int>(std::upper_bound(polygon_angle.begin(), polygon_angle.end(), phi) -
                           polygon_angle.begin()) - 1;
    }
    const int constraint = (polygon_start + r + 1) % n;
    return directions.row(constraint).dot(z) <= support[constraint];
  }
  // Quick accepts: any member ellipse, or the centered copy (inside by
  // symmetry: z = average of (z-s) and (z+s)).
  Eigen::VectorXd w = z;
  if (w.dot(C_shape * w) <= k) return true;
  for (const auto& s : shifts) {
    w = z - s;
    if (w.dot(C_shape * w) <= k) return true;
  }
  for (int i = 0; i < n_directions(); ++i)
    if (directions.row(i).dot(z) > support[i]) return false;
  return true;
}

bool hull_membership(const HullOfShiftedEllipses& hull, const Eigen::VectorXd& z) {
  return hull.contains(z);
}

HullOfShiftedEllipses make_hull(const GramData& gram, const TuningVector& tuning, double k,
                                int n_directions, double tol) {
  const int p = gram.p();
  if (p > 8)
    throw std::invalid_argument("make_hull: 2^p member ellipses; supported for p <= 8");
  std::vector<Eigen::VectorXd> shifts;
  for (const auto& d : all_sign_vectors(p)) shifts.push_back(shifted_mean(gram, tuning, d));
  return make_hull_from_shifts(gram.C, k, std::move(shifts), n_directions, tol);
}

HullOfShiftedEllipses make_hull_from_shifts(const Eigen::MatrixXd& C, double k,
                                            std::vector<Eigen::VectorXd> shifts,
                                            int n_directions, double tol) {
  const GramData gram = GramData::from_matrix(C);
  const int p = gram.p();
  if (!(k > 0.0) || !std::isfinite(k))
    throw std::invalid_argument("make_hull: k must be positive");
  if (shifts.empty()) throw std::invalid_argument("make_hull: no shifts");
  for (const auto& s : shifts)
    if (s.size() != p || !s.allFinite())
      throw std::invalid_argument("make_hull: shift dimension mismatch");
  if (n_directions != 0 && n_directions < 2 * p)
    throw std::invalid_argument("make_hull: too few directions");

  HullOfShiftedEllipses hull;
  hull.C_shape = gram.C;
  hull.C_inv = gram.C_inv;
  hull.k = k;
  hull.shifts = std::move(shifts);
  // shifted_mean is odd in d, so the shifts come in exact +- pairs; verify.
  for (const auto& s : hull.shifts) {
    bool paired = false;
    for (const auto& t : hull.shifts)
      if ((s + t).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + s.cwiseAbs().maxCoeff())) {
        paired = true;
        break;
      }
    if (!paired) throw std::logic_error("make_hull: shifts are not closed under negation");
  }

  hull.directions = default_directions(p, n_directions);

  // Exact coordinate bounds: the hull is a convex union, so per-coordinate
  // extremes are attained on a member ellipse.
  hull.box.lo.resize(p);
  hull.box.hi.resize(p);
  for (int j = 0; j < p; ++j) {
    double mx = 0.0, mn = 0.0;
    for (const auto& s : hull.shifts) {
      mx = std::max(mx, s[j]);
      mn = std::min(mn, s[j]);
    }
    const double r = std::sqrt(k * hull.C_inv(j, j));
    hull.box.hi[j] = mx + r;
    hull.box.lo[j] = mn - r;
  }

  hull.tol = tol >= 0.0 ? tol : 1e-6 * hull.box.diameter();

  const int nd = hull.n_directions();
  hull.support.resize(nd);
  for (int i = 0; i < nd; ++i) {
    const Eigen::VectorXd v = hull.directions.row(i).transpose();
    double shift_part = 0.0;
    for (const auto& s : hull.shifts) shift_part = std::max(shift_part, v.dot(s));
    hull.support[i] = shift_part + std::sqrt(k * v.dot(hull.C_inv * v)) + hull.tol;
  }

  build_polygon(hull);
  return hull;
}

Parallelogram::Parallelogram(Eigen::MatrixXd C_shape_, Eigen::VectorXd bounds_, double scale_)
    : C_shape(std::move(C_shape_)), bounds(std::move(bounds_)), scale(scale_) {
  if (bounds.size() != C_shape.rows())
    throw std::invalid_argument("Parallelogram: bounds dimension mismatch");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("Parallelogram: scale must be positive");
  for (int j = 0; j < bounds.size(); ++j)
    if (!(bounds[j] >= 0.0)) throw std::invalid_argument("Parallelogram: bounds must be >= 0");
  C_shape = GramData::from_matrix(C_shape).C;  // validates SPD, symmetrizes
}

std::vector<Eigen::VectorXd> parallelogram_vertices(const Parallelogram& par) {
  const int p = par.p();
  const GramData g = GramData::from_matrix(par.C_shape);
  std::vector<Eigen::VectorXd> out;
  out.reserve(std::size_t{1} << p);
  for (const auto& d : all_sign_vectors(p))
    out.push_back(par.scale * (g.C_inv * par.bounds.cwiseProduct(d.as_doubles())));
  return out;
}

PointCloudWithClosure::PointCloudWithClosure(std::vector<Eigen::VectorXd> points_,
                                             Eigen::MatrixXd C_bar_)
    : points(std::move(points_)), C_bar(std::move(C_bar_)) {
  if (points.empty()) throw std::invalid_argument("PointCloudWithClosure: no points");
  if (C_bar.rows() != C_bar.cols() || C_bar.rows() != points.front().size())
    throw std::invalid_argument("PointCloudWithClosure: dimension mismatch");
  cm.reserve(points.size());
  for (const auto& m : points) {
    if (m.size() != C_bar.rows())
      throw std::invalid_argument("PointCloudWithClosure: ragged point set");
    cm.push_back(C_bar * m);
  }
}

bool PointCloudWithClosure::contains(const Eigen::VectorXd& z) const {
  require_dim(static_cast<int>(z.size()), p(), "PointCloudWithClosure");
  // z lies in the cone at m for SOME sign vector d iff for every coordinate
  // with z_j != 0 the forced choice d_j = -sgn(z_j) satisfies the C_bar
  // inequality; coordinates with z_j = 0 admit either sign, so they never
  // constrain.  The existential over d therefore splits per coordinate.
  const Eigen::VectorXd w = C_bar * z;
  const int pp = p();
  for (std::size_t mi = 0; mi < points.size(); ++mi) {
    const Eigen::VectorXd& u = cm[mi];
    bool ok = true;
    for (int j = 0; j < pp; ++j) {
      if (z[j] > 0.0) {
        if (!(w[j] <= u[j])) { ok = false; break; }
      } else if (z[j] < 0.0) {
        if (!(w[j] >= u[j])) { ok = false; break; }
      }
    }
    if (ok) return true;
  }
  return false;
}

PointCloudWithClosure closure_condition_a(std::vector<Eigen::VectorXd> points,
                                          const Eigen::MatrixXd& C_bar) {
  return PointCloudWithClosure(std::move(points), C_bar);
}

bool shape_contains(const ConfidenceShape& shape, const Eigen::VectorXd& z) {
  return std::visit([&](const auto& s) { return s.contains(z); }, shape);
}

int shape_dim(const ConfidenceShape& shape) {
  return std::visit([](const auto& s) { return s.p(); }, shape);
}

Box bounding_box(const ConfidenceShape& shape) {
  struct Visitor {
    Box operator()(const Ellipse& e) const {
      Box b;
      const Eigen::VectorXd r = (e.k * e.C_inv.diagonal()).cwiseSqrt();
      b.lo = e.center - r;
      b.hi = e.center + r;
      return b;
    }
    Box operator()(const HullOfShiftedEllipses& h) const { return h.box; }
    Box operator()(const Parallelogram& par) const {
      Box b;
      const auto verts = parallelogram_vertices(par);
      b.lo = verts.front();
      b.hi = verts.front();
      for (const auto& v : verts) {
        b.lo = b.lo.cwiseMin(v);
        b.hi = b.hi.cwiseMax(v);
      }
      return b;
    }
    Box operator()(const PointCloudWithClosure& c) const {
      // The closure is unbounded (cones recede); this is a sampling window
      // of twice the generating points' extent, not a true bound.
      Box b;
      b.lo = c.points.front();
      b.hi = c.points.front();
      for (const auto& m : c.points) {
        b.lo = b.lo.cwiseMin(m);
        b.hi = b.hi.cwiseMax(m);
      }
      const Eigen::VectorXd mid = 0.5 * (b.lo + b.hi);
      const Eigen::VectorXd half =
          (b.hi - mid).cwiseMax(Eigen::VectorXd::Constant(c.p(), 1e-3));
      b.lo = mid - 2.0 * half;
      b.hi = mid + 2.0 * half;
      return b;
    }
  };
  return std::visit(Visitor{}, shape);
}

std::vector<Eigen::VectorXd> sample_interior(const ConfidenceShape& shape, std::size_t count,
                                             std::uint64_t seed) {
  const Box box = bounding_box(shape);
  const int p = box.p();
  SequentialRng rng(seed, stream::kInterior);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  std::size_t misses = 0;
  Eigen::VectorXd z(p);
  while (out.size() < count) {
    for (int j = 0; j < p; ++j)
      z[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * rng.uniform();
    if (shape_contains(shape, z)) {
      out.push_back(z);
      misses = 0;
    } else if (++misses >= 1000000) {
      throw EmptyShapeError("sample_interior: 10^6 consecutive rejections; shape looks empty");
    }
  }
  return out;
}

ConditionCheckResult check_condition_a(const ConfidenceShape& shape,
                                       const Eigen::MatrixXd& C_bar, std::size_t n_samples,
                                       std::uint64_t seed) {
  const int p = shape_dim(shape);
  if (C_bar.rows() != p || C_bar.cols() != p)
    throw std::invalid_argument("check_condition_a: C_bar dimension mismatch");

  ConditionCheckResult result;
  const Box box = bounding_box(shape);
  const Eigen::VectorXd mid = 0.5 * (box.lo + box.hi);
  result.clip_box.lo = mid + 2.0 * (box.lo - mid);
  result.clip_box.hi = mid + 2.0 * (box.hi - mid);
  const double diam = box.diameter();

  const Eigen::MatrixXd C_bar_inv =
      C_bar.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  const auto signs = all_sign_vectors(p);
  const std::size_t per_pair = 1 + 3 * static_cast<std::size_t>(p) + 4;
  const std::size_t n_m =
      std::max<std::size_t>(1, n_samples / (signs.size() * per_pair));

  const auto apexes = sample_interior(shape, n_m, seed);
  result.m_count = apexes.size();
  SequentialRng rng(seed, stream::kCone);

  std::vector<Eigen::VectorXd> candidates;
  for (const auto& m : apexes) {
    for (const auto& d : signs) {
      const OrthantCone cone(C_bar, d, m);
      candidates.clear();
      candidates.push_back(m);
      for (int j = 0; j < p; ++j) {
        const Eigen::VectorXd edge = d[j] * C_bar_inv.col(j);
        candidates.push_back(m + 0.25 * diam * edge);
        candidates.push_back(m + 1.0 * diam * edge);
        candidates.push_back(m + diam * rng.uniform() * edge);
      }
      for (int r = 0; r < 4; ++r) {
        Eigen::VectorXd c(p);
        for (int j = 0; j < p; ++j) c[j] = d[j] * diam * rng.uniform();
        candidates.push_back(m + C_bar_inv * c);
      }
      for (const auto& z : candidates) {
        if (!result.clip_box.contains(z)) continue;
        if (!cone_contains(cone, z)) continue;  // only certified cone members count
        ++result.cone_point_count;
        if (!shape_contains(shape, z)) {
          result.holds = false;
          result.counterexample = ConditionCounterexample{m, d, z};
          return result;
        }
      }
    }
  }
  return result;
}

VolumeEstimate mc_volume(const ConfidenceShape& shape, std::size_t n_samples,
                         std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("mc_volume: n_samples must be > 0");
  const Box box = bounding_box(shape);
  const int p = box.p();
  double box_vol = 1.0;
  for (int j = 0; j < p; ++j) box_vol *= box.hi[j] - box.lo[j];

  std::size_t hits = 0;
  Eigen::VectorXd z(p);
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (int j = 0; j < p; ++j)
      z[j] = box.lo[j] +
             (box.hi[j] - box.lo[j]) *
                 uniform_at(seed, stream::kVolume, i * static_cast<std::uint64_t>(p) + j);
    if (shape_contains(shape, z)) ++hits;
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(n_samples);
  VolumeEstimate est;
  est.volume = box_vol * frac;
  est.std_error = box_vol * std::sqrt(frac * (1.0 - frac) / static_cast<double>(n_samples));
  est.n_samples = n_samples;
  return est;
}

VolumeDifference mc_volume_difference(const ConfidenceShape& a, const ConfidenceShape& b,
                                      std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("mc_volume_difference: n_samples must be > 0");
  const Box ba = bounding_box(a);
  const Box bb = bounding_box(b);
  if (ba.p() != bb.p()) throw std::invalid_argument("mc_volume_difference: dimension mismatch");
  Box box;
  box.lo = ba.lo.cwiseMin(bb.lo);
  box.hi = ba.hi.cwiseMax(bb.hi);
  const int p = box.p();
  double box_vol = 1.0;
  for (int j = 0; j < p; ++j) box_vol *= box.hi[j] - box.lo[j];

  std::size_t in_a = 0, in_b = 0, in_exactly_one = 0;
  Eigen::VectorXd z(p);
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (int j = 0; j < p; ++j)
      z[j] = box.lo[j] +
             (box.hi[j] - box.lo[j]) *
                 uniform_at(seed, stream::kVolume, i * static_cast<std::uint64_t>(p) + j);
    const bool ia = shape_contains(a, z);
    const bool ib = shape_contains(b, z);
    in_a += ia;
    in_b += ib;
    in_exactly_one += ia != ib;
  }
  const double N = static_cast<double>(n_samples);
  const double mean_diff = (static_cast<double>(in_a) - static_cast<double>(in_b)) / N;
  const double second_moment = static_cast<double>(in_exactly_one) / N;
  VolumeDifference out;
  out.difference = box_vol * mean_diff;
  out.std_error =
      box_vol * std::sqrt(std::max(0.0, second_moment - mean_diff * mean_diff) / N);
  out.volume_a = box_vol * static_cast<double>(in_a) / N;
  out.volume_b = box_vol * static_cast<double>(in_b) / N;
  out.n_samples = n_samples;
  return out;
}

std::vector<Eigen::Vector2d> ellipse_boundary(const Ellipse& e, int n_points) {
  if (e.p() != 2) throw std::invalid_argument("ellipse_boundary: p = 2 only");
  if (n_points < 3) throw std::invalid_argument("ellipse_boundary: need >= 3 points");
  std::vector<Eigen::Vector2d> out;
  out.reserve(n_points + 1);
  const double rk = std::sqrt(e.k);
  for (int i = 0; i <= n_points; ++i) {
    const double th = 2.0 * std::numbers::pi * (i % n_points) / n_points;
    const Eigen::Vector2d u(std::cos(th), std::sin(th));
    out.emplace_back(e.center + rk * (e.C_sqrt_inv * u));
  }
  return out;
}

std::vector<Eigen::Vector2d> hull_boundary(const HullOfShiftedEllipses& hull) {
  if (hull.p() != 2 || !hull.polygon_ok)
    throw std::invalid_argument("hull_boundary: available for p = 2 hulls only");
  std::vector<Eigen::Vector2d> out = hull.polygon;
  out.push_back(hull.polygon.front());
  return out;
}

std::vector<Eigen::Vector2d> parallelogram_boundary(const Parallelogram& par) {
  if (par.p() != 2) throw std::invalid_argument("parallelogram_boundary: p = 2 only");
  const auto v = parallelogram_vertices(par);
  // sign-vector enumeration order is (+,+), (+,-), (-,+), (-,-); cyclic
  // boundary order is (+,+), (+,-), (-,-), (-,+).
  return {v[0].head<2>(), v[1].head<2>(), v[3].head<2>(), v[2].head<2>(), v[0].head<2>()};
}

}  // namespace confsets
