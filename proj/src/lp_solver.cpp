#include "polyobs/lp_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace polyobs {
namespace {

using Eigen::Index;

// Dense simplex tableau: constraint rows with the right-hand side in the last
// column, a reduced-cost row whose last entry is minus the objective, and the
// basic column of every row.
class Tableau {
 public:
  Tableau(Index rows, Index cols) : a_(MatrixXd::Zero(rows, cols + 1)), basis_(rows, -1) {}

  MatrixXd& a() { return a_; }
  const MatrixXd& a() const { return a_; }
  std::vector<Index>& basis() { return basis_; }
  const std::vector<Index>& basis() const { return basis_; }
  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols() - 1; }
  Index rhs() const { return a_.cols() - 1; }

  void pivot(Index r, Index j, Eigen::RowVectorXd& cost) {
    a_.row(r) /= a_(r, j);
    for (Index i = 0; i < rows(); ++i) {
      if (i != r && a_(i, j) != 0) a_.row(i) -= a_(i, j) * a_.row(r);
    }
    if (cost(j) != 0) cost -= cost(j) * a_.row(r);
    basis_[r] = j;
  }

  // Reduced costs for column costs `c` (length cols()) under the current basis.
  Eigen::RowVectorXd reduced_costs(const VectorXd& c) const {
    Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(a_.cols());
    cost.head(cols()) = c.transpose();
    for (Index i = 0; i < rows(); ++i) {
      const double cb = c(basis_[i]);
      if (cb != 0) cost -= cb * a_.row(i);
    }
    return cost;
  }

 private:
  MatrixXd a_;
  std::vector<Index> basis_;
};

enum class PhaseResult { Optimal, Unbounded };

// Bland's rule: lowest-index improving column enters; ratio ties leave by
// lowest basic index.
PhaseResult run_phase(Tableau& t, Eigen::RowVectorXd& cost, Index allowed_cols, double tol,
                      int& pivots, int cap) {
  for (;;) {
    Index enter = -1;
    for (Index j = 0; j < allowed_cols; ++j) {
      if (cost(j) < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return PhaseResult::Optimal;

    Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < t.rows(); ++i) {
      const double aij = t.a()(i, enter);
      if (aij <= tol) continue;
      const double ratio = t.a()(i, t.rhs()) / aij;
      if (leave < 0) {
        best = ratio;
        leave = i;
        continue;
      }
      const double slack = 1e-12 * std::max(1.0, std::abs(best));
      if (ratio < best - slack) {
        best = ratio;
        leave = i;
      } else if (ratio <= best + slack && t.basis()[i] < t.basis()[leave]) {
        leave = i;
      }
    }
    if (leave < 0) return PhaseResult::Unbounded;
    if (++pivots > cap) {
      std::ostringstream os;
      os << "lp_solve: pivot cap " << cap << " exceeded";
      throw Error(ErrorCode::IterationCap, os.str());
    }
    t.pivot(leave, enter, cost);
  }
}

void check_shapes(const LpProblem& p) {
  const Index n = p.n_vars();
  const bool eq_ok = p.eq_A.rows() == p.eq_b.size() && (p.eq_A.rows() == 0 || p.eq_A.cols() == n);
  const bool in_ok =
      p.ineq_A.rows() == p.ineq_b.size() && (p.ineq_A.rows() == 0 || p.ineq_A.cols() == n);
  if (!eq_ok || !in_ok) throw Error(ErrorCode::BadSize, "lp_solve: inconsistent constraint shapes");
  if (!p.c.allFinite() || !p.eq_b.allFinite() || !p.ineq_b.allFinite() || !p.eq_A.allFinite() ||
      !p.ineq_A.allFinite()) {
    throw Error(ErrorCode::Validation, "lp_solve: non-finite problem data");
  }
}

}  // namespace

double lp_max_violation(const LpProblem& p, const VectorXd& x) {
  double worst = 0;
  if (p.eq_A.rows() > 0) worst = std::max(worst, (p.eq_A * x - p.eq_b).cwiseAbs().maxCoeff());
  if (p.ineq_A.rows() > 0) worst = std::max(worst, (p.ineq_A * x - p.ineq_b).maxCoeff());
  return worst;
}

LpSolution lp_solve(const LpProblem& p, const LpOptions& opts) {
  check_shapes(p);
  const Index n = p.n_vars();
  const Index me = p.eq_A.rows();
  const Index mi = p.ineq_A.rows();
  const Index rows = me + mi;
  const Index n_struct = 2 * n + mi;  // x+, x-, slacks

  // Rows are sign-normalized so every right-hand side is nonnegative. An
  // inequality with b >= 0 starts with its slack basic; every other row gets
  // an artificial column.
  std::vector<double> sign(rows, 1.0);
  std::vector<bool> needs_art(rows, true);
  Index n_art = 0;
  for (Index i = 0; i < rows; ++i) {
    const double b = i < me ? p.eq_b(i) : p.ineq_b(i - me);
    if (b < 0) sign[i] = -1.0;
    if (i >= me && b >= 0) needs_art[i] = false;
    if (needs_art[i]) ++n_art;
  }

  Tableau t(rows, n_struct + n_art);
  Index art = n_struct;
  for (Index i = 0; i < rows; ++i) {
    auto row = t.a().row(i);
    if (i < me) {
      row.segment(0, n) = sign[i] * p.eq_A.row(i);
      row(t.rhs()) = sign[i] * p.eq_b(i);
    } else {
      row.segment(0, n) = sign[i] * p.ineq_A.row(i - me);
      row(2 * n + (i - me)) = sign[i];
      row(t.rhs()) = sign[i] * p.ineq_b(i - me);
    }
    row.segment(n, n) = -row.segment(0, n);
    if (needs_art[i]) {
      row(art) = 1.0;
      t.basis()[i] = art++;
    } else {
      t.basis()[i] = 2 * n + (i - me);
    }
  }

  const int cap = int(50 * (n + rows));
  const double tol = opts.pivot_tol;
  LpSolution sol;

  if (n_art > 0) {
    VectorXd c1 = VectorXd::Zero(t.cols());
    c1.tail(n_art).setOnes();
    Eigen::RowVectorXd cost = t.reduced_costs(c1);
    run_phase(t, cost, t.cols(), tol, sol.pivots, cap);
    const double infeas = -cost(t.rhs());
    const double bscale = 1.0 + std::max(p.eq_b.size() ? p.eq_b.cwiseAbs().maxCoeff() : 0.0,
                                         p.ineq_b.size() ? p.ineq_b.cwiseAbs().maxCoeff() : 0.0);
    if (infeas > opts.feas_tol * bscale) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive zero-level artificials out of the basis where a structural
    // column can replace them; rows without one are redundant and stay put.
    for (Index i = 0; i < rows; ++i) {
      if (t.basis()[i] < n_struct) continue;
      for (Index j = 0; j < n_struct; ++j) {
        if (std::abs(t.a()(i, j)) > 1e-9) {
          t.pivot(i, j, cost);
          break;
        }
      }
    }
  }

  VectorXd c2 = VectorXd::Zero(t.cols());
  c2.head(n) = p.c;
  c2.segment(n, n) = -p.c;
  Eigen::RowVectorXd cost = t.reduced_costs(c2);
  if (run_phase(t, cost, n_struct, tol, sol.pivots, cap) == PhaseResult::Unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  VectorXd values = VectorXd::Zero(t.cols());
  for (Index i = 0; i < rows; ++i) values(t.basis()[i]) = t.a()(i, t.rhs());
  sol.status = LpStatus::Optimal;
  sol.x = values.head(n) - values.segment(n, n);
  sol.objective_value = p.c.dot(sol.x);
  sol.tableau_objective = -cost(t.rhs());
  return sol;
}

SupportResult support_function(const PolytopeH& poly, const VectorXd& d) {
  if (d.size() != poly.dim() || poly.k.size() != poly.rows()) {
    throw Error(ErrorCode::BadSize, "support_function: dimension mismatch");
  }
  LpProblem lp;
  lp.c = -d;
  lp.eq_A.resize(0, d.size());
  lp.eq_b.resize(0);
  lp.ineq_A = poly.H;
  lp.ineq_b = poly.k;
  const LpSolution sol = lp_solve(lp);
  switch (sol.status) {
    case LpStatus::Infeasible:
      throw Error(ErrorCode::EmptyPolytope, "support_function: polytope is empty");
    case LpStatus::Unbounded:
      throw Error(ErrorCode::UnboundedDirection, "support_function: unbounded in direction");
    case LpStatus::Optimal:
      break;
  }
  return {d.dot(sol.x), sol.x};
}

}  // namespace polyobs
