#include "polyobs/observer_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "polyobs/ode.hpp"

namespace polyobs {

using Eigen::Index;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::Validation, msg); }

void check_shape(const MatrixXd& M, Index rows, Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << M.rows() << "x" << M.cols();
    invalid(os.str());
  }
  if (!M.allFinite()) invalid(std::string(name) + " has non-finite entries");
}

void check_bounds(const VectorXd& lo, const VectorXd& hi, Index len, const char* name) {
  if (lo.size() != len || hi.size() != len) {
    std::ostringstream os;
    os << name << " bounds must have length " << len;
    invalid(os.str());
  }
  if (!lo.allFinite() || !hi.allFinite()) invalid(std::string(name) + " bounds are not finite");
  if ((lo.array() > hi.array()).any()) invalid(std::string(name) + " lower bound exceeds upper");
}

}  // namespace

void SystemModel::validate() const {
  const Index nx = A.rows();
  if (nx < 1) invalid("A must have at least one row");
  check_shape(A, nx, nx, "A");
  check_shape(B, nx, B.cols(), "B");
  check_shape(W, nx, W.cols(), "W");
  check_shape(C, C.rows(), nx, "C");
  check_shape(D, C.rows(), B.cols(), "D");
  check_shape(V, C.rows(), V.cols(), "V");
  check_bounds(w_lo, w_hi, W.cols(), "w");
  check_bounds(v_lo, v_hi, V.cols(), "v");
  check_bounds(x0_lo, x0_hi, nx, "x0");
}

ClosedLoop validate_gain(const SystemModel& model, const MatrixXd& L) {
  model.validate();
  if (L.rows() != model.n() || L.cols() != model.l()) {
    std::ostringstream os;
    os << "L must be " << model.n() << "x" << model.l();
    throw Error(ErrorCode::Validation, os.str());
  }
  ClosedLoop cl{model, L, model.A - L * model.C, 0.0};
  const Spectrum<double> spec = eig_real(cl.A_cl);
  if (model.domain == TimeDomain::CT) {
    cl.stability_margin = -spec.max_real_part();
  } else {
    cl.stability_margin = 1 - spec.spectral_radius();
  }
  if (!(cl.stability_margin > 0)) {
    std::ostringstream os;
    os << "A - LC is not " << (model.domain == TimeDomain::CT ? "Hurwitz" : "Schur")
       << "; offending eigenvalue(s):";
    for (const auto& r : spec.real_eigs) {
      const bool bad = model.domain == TimeDomain::CT ? r.value >= 0 : std::abs(r.value) >= 1;
      if (bad) os << ' ' << r.value;
    }
    for (const auto& c : spec.complex_pairs) {
      const bool bad =
          model.domain == TimeDomain::CT ? c.sigma >= 0 : std::hypot(c.sigma, c.omega) >= 1;
      if (bad) os << ' ' << c.sigma << "+/-" << c.omega << 'i';
    }
    throw Error(ErrorCode::UnstableGain, os.str());
  }
  return cl;
}

NormalizedModel normalize_noise(const SystemModel& model) {
  NormalizedModel out{model, VectorXd::Zero(model.n()), VectorXd::Zero(model.l())};
  const VectorXd w_half = 0.5 * (model.w_hi - model.w_lo);
  const VectorXd v_half = 0.5 * (model.v_hi - model.v_lo);
  const VectorXd w_mid = 0.5 * (model.w_hi + model.w_lo);
  const VectorXd v_mid = 0.5 * (model.v_hi + model.v_lo);
  out.model.W = model.W * w_half.asDiagonal();
  out.model.V = model.V * v_half.asDiagonal();
  out.model.w_lo = -VectorXd::Ones(model.n_w());
  out.model.w_hi = VectorXd::Ones(model.n_w());
  out.model.v_lo = -VectorXd::Ones(model.n_v());
  out.model.v_hi = VectorXd::Ones(model.n_v());
  out.state_offset = model.W * w_mid;
  out.output_offset = model.V * v_mid;
  return out;
}

EmbeddingDynamics build_embedding(const ClosedLoop& cl, const TransformPair& tp) {
  const SystemModel& sys = cl.model;
  if (tp.domain != sys.domain) {
    throw Error(ErrorCode::DomainMismatch, "build_embedding: transform and model domains differ");
  }
  if (tp.n() != sys.n()) throw Error(ErrorCode::BadSize, "build_embedding: P has wrong width");
  EmbeddingDynamics dyn;
  dyn.domain = sys.domain;
  dyn.Q = tp.Q;
  if (sys.domain == TimeDomain::CT) {
    const auto split = split_diag_offdiag(tp.Q);
    dyn.Qup = split.diag + pos_part(split.offdiag);
    dyn.Qdown = neg_part(split.offdiag);
  } else {
    dyn.Qup = pos_part(tp.Q);
    dyn.Qdown = neg_part(tp.Q);
  }
  dyn.PW = tp.P * sys.W;
  dyn.PL = tp.P * cl.L;
  dyn.PLV = dyn.PL * sys.V;
  dyn.PB_LD = tp.P * (sys.B - cl.L * sys.D);

  const MatrixXd PWp = pos_part(dyn.PW), PWm = neg_part(dyn.PW);
  const MatrixXd PLVp = pos_part(dyn.PLV), PLVm = neg_part(dyn.PLV);
  dyn.lower_offset = PWp * sys.w_lo - PWm * sys.w_hi + PLVm * sys.v_lo - PLVp * sys.v_hi;
  dyn.upper_offset = PWp * sys.w_hi - PWm * sys.w_lo + PLVm * sys.v_hi - PLVp * sys.v_lo;
  dyn.f_eps = dyn.PW.cwiseAbs() * (sys.w_hi - sys.w_lo) + dyn.PLV.cwiseAbs() * (sys.v_hi - sys.v_lo);
  return dyn;
}

namespace {

// Error bound for a sum of k floating-point products, with headroom for the
// caller's own evaluation of the same quantity in a different order.
double sum_error(Index k) { return 4.0 * double(k + 2) * std::numeric_limits<double>::epsilon(); }

}  // namespace

FramerState initial_framer(const TransformPair& tp, const SystemModel& model) {
  const MatrixXd Pp = pos_part(tp.P), Pm = neg_part(tp.P);
  const VectorXd mag = model.x0_lo.cwiseAbs().cwiseMax(model.x0_hi.cwiseAbs());
  const VectorXd guard = sum_error(tp.n()) * (tp.P.cwiseAbs() * mag);
  return {Pp * model.x0_lo - Pm * model.x0_hi - guard, Pp * model.x0_hi - Pm * model.x0_lo + guard,
          0.0};
}

std::pair<VectorXd, VectorXd> embedding_rhs(const EmbeddingDynamics& dyn, const VectorXd& z_lo,
                                            const VectorXd& z_hi, const VectorXd& y,
                                            const VectorXd& u) {
  VectorXd drive = dyn.PL * y + dyn.PB_LD * u;
  VectorXd lo = dyn.Qup * z_lo - dyn.Qdown * z_hi + dyn.lower_offset + drive;
  VectorXd hi = dyn.Qup * z_hi - dyn.Qdown * z_lo + dyn.upper_offset + drive;
  return {std::move(lo), std::move(hi)};
}

void check_order(const FramerState& s, double slack) {
  for (Index i = 0; i < s.z_lo.size(); ++i) {
    const double tol = slack * (1.0 + std::abs(s.z_lo(i)) + std::abs(s.z_hi(i)));
    if (!(s.z_lo(i) <= s.z_hi(i) + tol)) {
      std::ostringstream os;
      os << "framer order violated at t=" << s.t << ", row " << i << ": " << s.z_lo(i) << " > "
         << s.z_hi(i);
      throw Error(ErrorCode::OrderViolation, os.str());
    }
  }
}

FramerState step_embedding_dt(const EmbeddingDynamics& dyn, const FramerState& s,
                              const VectorXd& y, const VectorXd& u) {
  if (dyn.domain != TimeDomain::DT) {
    throw Error(ErrorCode::DomainMismatch, "step_embedding_dt: embedding is continuous-time");
  }
  auto [lo, hi] = embedding_rhs(dyn, s.z_lo, s.z_hi, y, u);
  const VectorXd zmag = s.z_lo.cwiseAbs().cwiseMax(s.z_hi.cwiseAbs());
  const VectorXd terms = (dyn.Qup.cwiseAbs() + dyn.Qdown.cwiseAbs()) * zmag +
                         dyn.PL.cwiseAbs() * y.cwiseAbs() + dyn.PB_LD.cwiseAbs() * u.cwiseAbs() +
                         dyn.lower_offset.cwiseAbs().cwiseMax(dyn.upper_offset.cwiseAbs());
  const VectorXd guard = sum_error(2 * dyn.m() + y.size() + u.size() + 1) * terms;
  lo -= guard;
  hi += guard;
  FramerState next{std::move(lo), std::move(hi), s.t + 1};
  check_order(next, 1e-12);
  return next;
}

FramerTrajectory integrate_embedding_ct(const EmbeddingDynamics& dyn, const FramerState& s,
                                        const Signal& y_fn, const Signal& u_fn, double dt,
                                        long steps, double order_slack) {
  if (dyn.domain != TimeDomain::CT) {
    throw Error(ErrorCode::DomainMismatch, "integrate_embedding_ct: embedding is discrete-time");
  }
  if (!(dt > 0)) throw Error(ErrorCode::Validation, "integrate_embedding_ct: dt must be positive");
  if (!(dt * mu_inf(metzlerize(dyn.Q)) > -2)) {
    throw Error(ErrorCode::StepTooLarge, "integrate_embedding_ct: dt too large for the explicit scheme");
  }
  const Index m = dyn.m();
  auto rhs = [&](double t, const VectorXd& z) -> VectorXd {
    auto [lo, hi] = embedding_rhs(dyn, z.head(m), z.tail(m), y_fn(t), u_fn(t));
    VectorXd out(2 * m);
    out << lo, hi;
    return out;
  };
  FramerTrajectory traj;
  traj.states.reserve(steps + 1);
  traj.states.push_back(s);
  VectorXd z(2 * m);
  z << s.z_lo, s.z_hi;
  for (long k = 0; k < steps; ++k) {
    const double t = s.t + k * dt;
    z = rk4_step(rhs, t, z, dt);
    FramerState next{z.head(m), z.tail(m), s.t + (k + 1) * dt};
    check_order(next, order_slack);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

std::pair<VectorXd, VectorXd> output_bounds(const SystemModel& model, const VectorXd& y,
                                            const VectorXd& u) {
  const VectorXd base = y - model.D * u;
  const MatrixXd Vp = pos_part(model.V), Vm = neg_part(model.V);
  return {base - Vp * model.v_hi + Vm * model.v_lo, base - Vp * model.v_lo + Vm * model.v_hi};
}

PolytopeH polytope_estimate(const TransformPair& tp, const SystemModel& model,
                            const FramerState& s, const VectorXd& y, const VectorXd& u,
                            const std::optional<IntervalBox>& state_box) {
  const Index m = tp.m(), n = tp.n(), l = model.l();
  const Index box_rows = state_box ? 2 * n : 0;
  const auto [y_lo, y_hi] = output_bounds(model, y, u);
  PolytopeH poly;
  poly.H.resize(2 * m + 2 * l + box_rows, n);
  poly.k.resize(2 * m + 2 * l + box_rows);
  poly.H.topRows(m) = tp.P;
  poly.H.middleRows(m, m) = -tp.P;
  poly.H.middleRows(2 * m, l) = model.C;
  poly.H.middleRows(2 * m + l, l) = -model.C;
  poly.k.segment(0, m) = s.z_hi;
  poly.k.segment(m, m) = -s.z_lo;
  poly.k.segment(2 * m, l) = y_hi;
  poly.k.segment(2 * m + l, l) = -y_lo;
  if (state_box) {
    poly.H.bottomRows(box_rows) << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
    poly.k.tail(box_rows) << state_box->hi, -state_box->lo;
  }
  return poly;
}

IntervalMap make_interval_map(const TransformPair& tp, const SystemModel& model) {
  MatrixXd Ptilde(tp.m() + model.l(), tp.n());
  Ptilde << tp.P, model.C;
  IntervalMap map;
  map.pinv = pinv_full_col(Ptilde);
  map.pinv_plus = pos_part(map.pinv);
  map.pinv_minus = neg_part(map.pinv);
  return map;
}

IntervalBox interval_estimate(const IntervalMap& map, const SystemModel& model,
                              const FramerState& s, const VectorXd& y, const VectorXd& u) {
  const auto [y_lo, y_hi] = output_bounds(model, y, u);
  const Index m = s.z_lo.size(), l = model.l();
  VectorXd b_lo(m + l), b_hi(m + l);
  b_lo << s.z_lo, y_lo;
  b_hi << s.z_hi, y_hi;
  return {map.pinv_plus * b_lo - map.pinv_minus * b_hi, map.pinv_plus * b_hi - map.pinv_minus * b_lo};
}

IntervalBox interval_estimate(const TransformPair& tp, const SystemModel& model,
                              const FramerState& s, const VectorXd& y, const VectorXd& u) {
  return interval_estimate(make_interval_map(tp, model), model, s, y, u);
}

double iss_bound(const EmbeddingDynamics& dyn, double eps0_norm, double t) {
  const double f = dyn.f_eps.size() ? dyn.f_eps.cwiseAbs().maxCoeff() : 0.0;
  if (dyn.domain == TimeDomain::CT) {
    const double mu = mu_inf(dyn.Q);
    const double decay = std::exp(mu * t);
    return decay * eps0_norm + std::expm1(mu * t) / mu * f;
  }
  const double q = norm_inf(dyn.Q);
  const double decay = std::pow(q, t);
  return decay * eps0_norm + (1 - decay) / (1 - q) * f;
}

double iss_bound(const TransformPair& tp, const ClosedLoop& cl, double eps0_norm, double t) {
  return iss_bound(build_embedding(cl, tp), eps0_norm, t);
}

}  // namespace polyobs
