#ifndef POLYOBS_SET_GEOMETRY_HPP
#define POLYOBS_SET_GEOMETRY_HPP

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "polyobs/matrix_core.hpp"
#include "polyobs/sets.hpp"

namespace polyobs {

/// Counter-clockwise vertex list; the closing edge is implicit.
struct Polygon2D {
  std::vector<Eigen::Vector2d> vertices;
};

/// H x <= k + tol elementwise.
bool contains(const PolytopeH& poly, const VectorXd& x, double tol = 0.0);

double volume_box(const IntervalBox& b);

struct VolumeEstimate {
  double estimate = 0;
  double std_error = 0;
};

/// Counter-based uniform draws: sample i, coordinate d is a pure function of
/// (seed, i, d), so draws never depend on evaluation order.
double counter_uniform(std::uint64_t seed, std::uint64_t index);

/// Seeded unit-cube samples, mapped affinely into whatever box is queried.
/// Holding one sampler across many queries avoids regenerating the draws.
class UnitCubeSampler {
 public:
  UnitCubeSampler(Eigen::Index dim, Eigen::Index samples, std::uint64_t seed);

  Eigen::Index dim() const { return unit_.cols(); }
  Eigen::Index samples() const { return unit_.rows(); }

  /// Hit-or-miss volume of poly inside bbox, with binomial standard error.
  VolumeEstimate volume(const PolytopeH& poly, const IntervalBox& bbox) const;

  /// Counts samples of `region` that satisfy `poly` but fall outside `box`
  /// (beyond `tol`). Also reports how many samples `poly` accepted.
  std::pair<long, long> escapes(const PolytopeH& poly, const IntervalBox& region,
                                const IntervalBox& box, double tol) const;

 private:
  // Flags for samples of `region` accepted by poly.
  Eigen::Array<bool, Eigen::Dynamic, 1> accepted(const PolytopeH& poly,
                                                 const IntervalBox& region) const;

  MatrixXd unit_;  // one sample per row
};

VolumeEstimate volume_mc(const PolytopeH& poly, const IntervalBox& bbox, long samples,
                         std::uint64_t seed);

/// Outer approximation of the projection onto coordinates (i, j) from support
/// values in n_dirs equally spaced planar directions.
Polygon2D project2d_outer(const PolytopeH& poly, std::pair<int, int> dims, int n_dirs);

double polygon_area(const Polygon2D& p);

void write_polygon_csv(std::ostream& os, const Polygon2D& p);

}  // namespace polyobs

#endif  // POLYOBS_SET_GEOMETRY_HPP
