#ifndef POLYOBS_SETS_HPP
#define POLYOBS_SETS_HPP

#include "polyobs/matrix_core.hpp"

namespace polyobs {

/// Half-space polytope {x : H x <= k}.
struct PolytopeH {
  MatrixXd H;
  VectorXd k;

  Eigen::Index dim() const { return H.cols(); }
  Eigen::Index rows() const { return H.rows(); }
};

/// Axis-aligned box [lo, hi].
struct IntervalBox {
  VectorXd lo;
  VectorXd hi;

  Eigen::Index dim() const { return lo.size(); }
  VectorXd width() const { return hi - lo; }
  VectorXd center() const { return 0.5 * (lo + hi); }
};

/// The box as a polytope: rows [I; -I], offsets [hi; -lo].
inline PolytopeH to_polytope(const IntervalBox& b) {
  const Eigen::Index n = b.dim();
  PolytopeH p;
  p.H.resize(2 * n, n);
  p.H << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  p.k.resize(2 * n);
  p.k << b.hi, -b.lo;
  return p;
}

}  // namespace polyobs

#endif  // POLYOBS_SETS_HPP
