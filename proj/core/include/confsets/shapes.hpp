#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "confsets/model.hpp"

namespace confsets {

/// Axis-aligned box.  For bounded shapes it contains the shape; for the
/// closure variant (whose cones are unbounded) it is only a finite sampling
/// window around the generating points.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  int p() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::VectorXd& z) const {
    return (z.array() >= lo.array()).all() && (z.array() <= hi.array()).all();
  }
  double diameter() const { return (hi - lo).norm(); }
};

/// The orthant cone rooted at apex m: all z with d_j z_j <= 0 and
/// d_j (C_bar z)_j >= d_j (C_bar m)_j for every coordinate.  All
/// inequalities are weak; boundary points are members.
struct OrthantCone {
  Eigen::MatrixXd C_bar;
  SignVector d;
  Eigen::VectorXd apex;

  OrthantCone(Eigen::MatrixXd C_bar_, SignVector d_, Eigen::VectorXd apex_);
};

bool cone_contains(const OrthantCone& cone, const Eigen::VectorXd& z);

/// {z : (z - center)' C_shape (z - center) <= k}.
struct Ellipse {
  Eigen::MatrixXd C_shape;
  double k = 1.0;
  Eigen::VectorXd center;

  Ellipse(Eigen::MatrixXd C_shape_, double k_, Eigen::VectorXd center_);
  Ellipse(const GramData& gram, double k_);  // centered at 0

  bool contains(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd w = z - center;
    return w.dot(C_shape * w) <= k;
  }
  int p() const { return static_cast<int>(C_shape.rows()); }

  // cached from the SPD factorization of C_shape
  Eigen::MatrixXd C_inv;
  Eigen::MatrixXd C_sqrt_inv;
};

/// Convex hull of the ellipse {z'Cz <= k} shifted to each of the 2^p
/// centers.  Membership is a support-function test on a fixed direction
/// grid: z is in iff for every grid direction v,
///     v'z <= max over shifts s of [ v's + sqrt(k * v'C^{-1}v) ] + tol.
/// The error is one-sided: points within tol of the boundary may be
/// accepted although they lie just outside.
///
/// For p = 2 the same halfplane system is precomputed as a convex polygon,
/// so membership is an O(log n_directions) sector lookup; it agrees with the
/// full scan except possibly for points within floating-point rounding
/// (~1e-15 relative) of a support line.  For p >= 3 the direction grid comes
/// in exact antipodal pairs, so the verdict is symmetric under negation.
struct HullOfShiftedEllipses {
  Eigen::MatrixXd C_shape;
  double k = 1.0;
  std::vector<Eigen::VectorXd> shifts;  // closed under negation
  Eigen::MatrixXd directions;           // n_directions x p unit rows
  double tol = 0.0;

  bool contains(const Eigen::VectorXd& z) const;
  int p() const { return static_cast<int>(C_shape.rows()); }
  int n_directions() const { return static_cast<int>(directions.rows()); }

  // caches built on construction
  Eigen::MatrixXd C_inv;
  Eigen::VectorXd support;  // per direction, tol already added
  Box box;                  // exact coordinate bounds of the hull
  std::vector<Eigen::Vector2d> polygon;  // p = 2 only
  std::vector<double> polygon_angle;
  int polygon_start = 0;  // rotation offset back to constraint indices
  bool polygon_ok = false;
};

/// Builds the hull for the shifts {shifted_mean(gram, tuning, d) : all d}.
/// n_directions = 0 picks the default grid (720 for p = 2, 10^4 Halton
/// sphere points in antipodal pairs otherwise); tol < 0 picks 1e-6 * hull
/// diameter.
HullOfShiftedEllipses make_hull(const GramData& gram, const TuningVector& tuning, double k,
                                int n_directions = 0, double tol = -1.0);

/// Hull from an explicit shift list (must be closed under negation).  All
/// caches are rebuilt deterministically from the arguments, so a hull
/// serialized as (C, k, shifts, n_directions, tol) reconstructs with
/// bit-identical membership.
HullOfShiftedEllipses make_hull_from_shifts(const Eigen::MatrixXd& C, double k,
                                            std::vector<Eigen::VectorXd> shifts,
                                            int n_directions = 0, double tol = -1.0);

/// Same membership as shape.contains; kept as a free function since the
/// support-function test is an operation of independent interest.
bool hull_membership(const HullOfShiftedEllipses& hull, const Eigen::VectorXd& z);

/// {z : |(C_shape z)_j| <= scale * bounds_j for all j}.
struct Parallelogram {
  Eigen::MatrixXd C_shape;
  Eigen::VectorXd bounds;
  double scale = 1.0;

  Parallelogram(Eigen::MatrixXd C_shape_, Eigen::VectorXd bounds_, double scale_);

  bool contains(const Eigen::VectorXd& z) const {
    return ((C_shape * z).cwiseAbs().array() <= (scale * bounds).array()).all();
  }
  int p() const { return static_cast<int>(C_shape.rows()); }
};

/// Corner points scale * C^{-1} (bounds o d) over all sign vectors d, in
/// sign-vector enumeration order.
std::vector<Eigen::VectorXd> parallelogram_vertices(const Parallelogram& par);

/// A finite point set together with the smallest superset closed under the
/// cone condition: z is a member iff z lies in some orthant cone rooted at
/// one of the points.  Only sign vectors compatible with z matter, and the
/// existential over d splits per coordinate, so membership is O(points * p).
struct PointCloudWithClosure {
  std::vector<Eigen::VectorXd> points;
  Eigen::MatrixXd C_bar;

  PointCloudWithClosure(std::vector<Eigen::VectorXd> points_, Eigen::MatrixXd C_bar_);

  bool contains(const Eigen::VectorXd& z) const;
  int p() const { return static_cast<int>(C_bar.rows()); }

  std::vector<Eigen::VectorXd> cm;  // cached C_bar * point
};

/// Closure of a finite point cloud under the cone condition.
PointCloudWithClosure closure_condition_a(std::vector<Eigen::VectorXd> points,
                                          const Eigen::MatrixXd& C_bar);

using ConfidenceShape =
    std::variant<Ellipse, HullOfShiftedEllipses, Parallelogram, PointCloudWithClosure>;

bool shape_contains(const ConfidenceShape& shape, const Eigen::VectorXd& z);
int shape_dim(const ConfidenceShape& shape);
Box bounding_box(const ConfidenceShape& shape);

/// Uniform draws from shape-intersect-box by rejection; throws
/// EmptyShapeError when 10^6 consecutive proposals miss.
std::vector<Eigen::VectorXd> sample_interior(const ConfidenceShape& shape, std::size_t count,
                                             std::uint64_t seed);

struct ConditionCounterexample {
  Eigen::VectorXd m;
  SignVector d;
  Eigen::VectorXd z;
};

/// Outcome of the sampled cone-condition check.  holds == true means no
/// violation was found among the sampled cone points (necessary evidence,
/// not a proof); a counterexample is a certified violation.
struct ConditionCheckResult {
  bool holds = true;
  std::optional<ConditionCounterexample> counterexample;
  std::size_t m_count = 0;           // apex points sampled from the shape
  std::size_t cone_point_count = 0;  // confirmed cone members tested
  Box clip_box;                      // cone points were clipped to this window
};

/// Samples apexes m from the shape, generates points of each orthant cone
/// rooted at m (apex, edge rays along the columns of C_bar^{-1} D, random
/// nonnegative combinations), keeps only confirmed cone members inside a
/// 2x bounding-box window, and reports the first one that escapes the shape.
ConditionCheckResult check_condition_a(const ConfidenceShape& shape,
                                       const Eigen::MatrixXd& C_bar, std::size_t n_samples,
                                       std::uint64_t seed);

/// Monte Carlo volume of a bounded shape via hit counting on its box.
struct VolumeEstimate {
  double volume = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};
VolumeEstimate mc_volume(const ConfidenceShape& shape, std::size_t n_samples,
                         std::uint64_t seed);

/// Paired estimate of vol(a) - vol(b) using common draws on the union box;
/// the shared randomness makes the difference far tighter than two
/// independent volume estimates.
struct VolumeDifference {
  double difference = 0.0;
  double std_error = 0.0;
  double volume_a = 0.0;
  double volume_b = 0.0;
  std::size_t n_samples = 0;
};
VolumeDifference mc_volume_difference(const ConfidenceShape& a, const ConfidenceShape& b,
                                      std::size_t n_samples, std::uint64_t seed);

/// Boundary polylines for plotting (p = 2 only); closed curves, first point
/// repeated at the end.
std::vector<Eigen::Vector2d> ellipse_boundary(const Ellipse& e, int n_points = 512);
std::vector<Eigen::Vector2d> hull_boundary(const HullOfShiftedEllipses& hull);
std::vector<Eigen::Vector2d> parallelogram_boundary(const Parallelogram& par);

}  // namespace confsets
