#ifndef POLYOBS_LP_SOLVER_HPP
#define POLYOBS_LP_SOLVER_HPP

#include <utility>

#include "polyobs/matrix_core.hpp"
#include "polyobs/sets.hpp"

namespace polyobs {

/// minimize c^T x  subject to  eq_A x = eq_b,  ineq_A x <= ineq_b,  x free.
/// Either constraint block may have zero rows; its column count must still
/// equal the variable count.
struct LpProblem {
  VectorXd c;
  MatrixXd eq_A;
  VectorXd eq_b;
  MatrixXd ineq_A;
  VectorXd ineq_b;

  Eigen::Index n_vars() const { return c.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  VectorXd x;                    // set iff Optimal
  double objective_value = 0;    // c^T x, set iff Optimal
  double tableau_objective = 0;  // objective read off the final phase-2 tableau
  int pivots = 0;
};

struct LpOptions {
  double pivot_tol = 1e-11;
  double feas_tol = 1e-8;
};

/// Two-phase dense tableau simplex with Bland's rule. Free variables are
/// split into nonnegative parts and inequalities receive slacks. Throws
/// IterationCap after 50 * (n_vars + rows) pivots.
LpSolution lp_solve(const LpProblem& p, const LpOptions& opts = {});

/// Largest constraint violation of x (equalities in absolute value).
double lp_max_violation(const LpProblem& p, const VectorXd& x);

struct SupportResult {
  double value;
  VectorXd maximizer;
};

/// max d^T x over the polytope. Throws EmptyPolytope or UnboundedDirection.
SupportResult support_function(const PolytopeH& poly, const VectorXd& d);

}  // namespace polyobs

#endif  // POLYOBS_LP_SOLVER_HPP
