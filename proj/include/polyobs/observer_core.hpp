#ifndef POLYOBS_OBSERVER_CORE_HPP
#define POLYOBS_OBSERVER_CORE_HPP

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "polyobs/matrix_core.hpp"
#include "polyobs/sets.hpp"
#include "polyobs/transform_synth.hpp"

namespace polyobs {

/// x+ = A x + B u + W w,  y = C x + D u + V v, with w in [w_lo, w_hi],
/// v in [v_lo, v_hi] and x0 in [x0_lo, x0_hi]. B, D, V and C may have a zero
/// dimension.
struct SystemModel {
  MatrixXd A, B, W, C, D, V;
  TimeDomain domain = TimeDomain::CT;
  VectorXd w_lo, w_hi, v_lo, v_hi, x0_lo, x0_hi;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index l() const { return C.rows(); }
  Eigen::Index s() const { return B.cols(); }
  Eigen::Index n_w() const { return W.cols(); }
  Eigen::Index n_v() const { return V.cols(); }

  /// Throws Validation on inconsistent dimensions, non-finite data or
  /// inverted bounds.
  void validate() const;
};

struct ClosedLoop {
  SystemModel model;
  MatrixXd L;
  MatrixXd A_cl;
  /// -max Re(lambda) for CT, 1 - spectral radius for DT; positive when stable.
  double stability_margin = 0;
};

ClosedLoop validate_gain(const SystemModel& model, const MatrixXd& L);

struct NormalizedModel {
  SystemModel model;       // noise bounds are [-1, 1] on every channel
  VectorXd state_offset;   // W * center(w), added to the dynamics
  VectorXd output_offset;  // V * center(v), added to the output
};

NormalizedModel normalize_noise(const SystemModel& model);

/// Precomputed matrices of the lifted observer z+ = Q z + PL y + PW w - PLV v
/// + P(B - LD) u and its embedding system.
struct EmbeddingDynamics {
  TimeDomain domain = TimeDomain::CT;
  MatrixXd Q;
  MatrixXd Qup;
  MatrixXd Qdown;
  MatrixXd PW;
  MatrixXd PLV;
  MatrixXd PL;
  MatrixXd PB_LD;
  VectorXd lower_offset;  // (PW)+ w_lo - (PW)- w_hi + (PLV)- v_lo - (PLV)+ v_hi
  VectorXd upper_offset;  // (PW)+ w_hi - (PW)- w_lo + (PLV)- v_hi - (PLV)+ v_lo
  VectorXd f_eps;         // |PW| dw + |PLV| dv = upper_offset - lower_offset

  Eigen::Index m() const { return Q.rows(); }
};

EmbeddingDynamics build_embedding(const ClosedLoop& cl, const TransformPair& tp);

struct FramerState {
  VectorXd z_lo;
  VectorXd z_hi;
  double t = 0;  // seconds for CT, step index for DT

  VectorXd width() const { return z_hi - z_lo; }
};

/// Framers of z0 = P x0 implied by the initial box, widened by a rounding
/// bound so that P x0 evaluated in floating point stays inside.
FramerState initial_framer(const TransformPair& tp, const SystemModel& model);

/// Right-hand side of the embedding system for given framers and signals.
std::pair<VectorXd, VectorXd> embedding_rhs(const EmbeddingDynamics& dyn, const VectorXd& z_lo,
                                            const VectorXd& z_hi, const VectorXd& y,
                                            const VectorXd& u);

/// Throws OrderViolation when z_lo exceeds z_hi by more than `slack`.
void check_order(const FramerState& s, double slack);

/// One DT step of the embedding. Both framers are pushed outward by a bound on
/// the floating-point error of the step, so enclosure survives rounding.
FramerState step_embedding_dt(const EmbeddingDynamics& dyn, const FramerState& s,
                              const VectorXd& y, const VectorXd& u);

struct FramerTrajectory {
  std::vector<FramerState> states;
};

using Signal = std::function<VectorXd(double)>;

/// Fixed-step RK4 of the 2m-dimensional embedding ODE; y_fn and u_fn are
/// sampled at the stage times t, t + dt/2 and t + dt.
FramerTrajectory integrate_embedding_ct(const EmbeddingDynamics& dyn, const FramerState& s,
                                        const Signal& y_fn, const Signal& u_fn, double dt,
                                        long steps, double order_slack = 1e-9);

/// Output-equation bounds y - Du - V+ v_hi + V- v_lo <= C x <= y - Du - V+ v_lo + V- v_hi.
std::pair<VectorXd, VectorXd> output_bounds(const SystemModel& model, const VectorXd& y,
                                            const VectorXd& u);

PolytopeH polytope_estimate(const TransformPair& tp, const SystemModel& model,
                            const FramerState& s, const VectorXd& y, const VectorXd& u,
                            const std::optional<IntervalBox>& state_box = std::nullopt);

/// Pseudoinverse of [P; C] split into nonnegative parts, reusable across
/// samples.
struct IntervalMap {
  MatrixXd pinv;
  MatrixXd pinv_plus;
  MatrixXd pinv_minus;
};

IntervalMap make_interval_map(const TransformPair& tp, const SystemModel& model);

IntervalBox interval_estimate(const IntervalMap& map, const SystemModel& model,
                              const FramerState& s, const VectorXd& y, const VectorXd& u);
IntervalBox interval_estimate(const TransformPair& tp, const SystemModel& model,
                              const FramerState& s, const VectorXd& y, const VectorXd& u);

/// Envelope on ||z_hi - z_lo||_inf at time t (seconds for CT, steps for DT).
double iss_bound(const EmbeddingDynamics& dyn, double eps0_norm, double t);
double iss_bound(const TransformPair& tp, const ClosedLoop& cl, double eps0_norm, double t);

}  // namespace polyobs

#endif  // POLYOBS_OBSERVER_CORE_HPP
