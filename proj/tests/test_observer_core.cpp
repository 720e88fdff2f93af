#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <complex>
#include <random>

#include "fixtures.hpp"
#include "polyobs/observer_core.hpp"
#include "polyobs/ode.hpp"
#include "polyobs/set_geometry.hpp"

using namespace polyobs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

SystemModel raissi_model() {
  SystemModel m;
  m.A = fixtures::raissi_A();
  m.C = fixtures::raissi_C();
  m.W = fixtures::raissi_W();
  m.B.resize(3, 0);
  m.D.resize(1, 0);
  m.V.resize(1, 0);
  m.domain = TimeDomain::CT;
  m.w_lo = VectorXd::Constant(1, -1);
  m.w_hi = VectorXd::Constant(1, 1);
  m.x0_lo = VectorXd::Constant(3, 0.2);
  m.x0_hi = VectorXd::Constant(3, 0.8);
  return m;
}

SystemModel meslem_model() {
  SystemModel m;
  m.A = fixtures::meslem_A();
  m.C = fixtures::meslem_C();
  m.W = MatrixXd{{-1}, {0}, {0}, {0}, {1}};
  m.B.resize(5, 0);
  m.D.resize(2, 0);
  m.V.resize(2, 0);
  m.domain = TimeDomain::DT;
  m.w_lo = VectorXd::Constant(1, -1);
  m.w_hi = VectorXd::Constant(1, 1);
  m.x0_lo = VectorXd::Constant(5, -1);
  m.x0_hi = VectorXd::Constant(5, 1);
  return m;
}

TransformPair manual_pair(const MatrixXd& P, const MatrixXd& Q, TimeDomain d) {
  TransformPair tp;
  tp.P = P;
  tp.Q = Q;
  tp.domain = d;
  return tp;
}

// Random DT model with inputs and both noise channels. A is stable and L = 0.
struct RandomDt {
  SystemModel model;
  MatrixXd L;
};

RandomDt random_dt(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0, 1);
  RandomDt r;
  SystemModel& m = r.model;
  m.A = fixtures::planted(rng, n, true).A;
  m.B = fixtures::random_matrix(rng, n, 1);
  m.W = fixtures::random_matrix(rng, n, 2);
  m.C = fixtures::random_matrix(rng, 1, n);
  m.D = fixtures::random_matrix(rng, 1, 1);
  m.V = fixtures::random_matrix(rng, 1, 1);
  m.domain = TimeDomain::DT;
  m.w_lo = VectorXd{{-0.5 - u(rng), -u(rng)}};
  m.w_hi = VectorXd{{0.5 + u(rng), u(rng)}};
  m.v_lo = VectorXd{{-0.1}};
  m.v_hi = VectorXd{{0.2}};
  m.x0_lo = VectorXd::Constant(n, -1);
  m.x0_hi = VectorXd::Constant(n, 1);
  r.L = MatrixXd::Zero(n, 1);
  return r;
}

}  // namespace

TEST_CASE("model validation") {
  SystemModel m = raissi_model();
  CHECK_NOTHROW(m.validate());
  m.x0_lo(0) = 0.9;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::Validation);
  m = raissi_model();
  m.W.resize(2, 1);
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::Validation);
  m = raissi_model();
  m.w_lo.resize(0);
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::Validation);
}

TEST_CASE("validate_gain") {
  const ClosedLoop cl = validate_gain(raissi_model(), fixtures::raissi_L());
  CHECK(cl.A_cl == fixtures::raissi_A() - fixtures::raissi_L() * fixtures::raissi_C());
  const auto spec = eig_real(cl.A_cl);
  REQUIRE(spec.real_eigs.size() == 1);
  CHECK(spec.real_eigs[0].value == doctest::Approx(-6.7827).epsilon(1e-4));
  CHECK(spec.complex_pairs[0].sigma == doctest::Approx(-4).epsilon(1e-4));
  CHECK(spec.complex_pairs[0].omega == doctest::Approx(1.732).epsilon(1e-3));
  CHECK(cl.stability_margin == doctest::Approx(4).epsilon(1e-4));

  try {
    validate_gain(raissi_model(), MatrixXd::Zero(3, 1));
    FAIL("expected EUnstableGain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnstableGain);
    CHECK(std::string(e.what()).find(" 2") != std::string::npos);
  }

  const ClosedLoop dt = validate_gain(meslem_model(), fixtures::meslem_L());
  CHECK(dt.stability_margin > 0);
  CHECK(code_of([] { validate_gain(raissi_model(), MatrixXd::Zero(3, 2)); }) == ErrorCode::Validation);
}

TEST_CASE("normalize_noise") {
  const SystemModel m = raissi_model();
  const NormalizedModel same = normalize_noise(m);
  CHECK(same.model.W == m.W);
  CHECK(same.state_offset.isZero(0));

  SystemModel shifted = m;
  shifted.w_lo(0) = 0;
  shifted.w_hi(0) = 2;
  const NormalizedModel nm = normalize_noise(shifted);
  CHECK(nm.model.W == m.W);
  CHECK(nm.model.w_lo(0) == -1);
  CHECK(nm.model.w_hi(0) == 1);
  CHECK(nm.state_offset == m.W);

  SystemModel flat = m;
  flat.w_lo(0) = flat.w_hi(0) = 0.3;
  CHECK(normalize_noise(flat).model.W.isZero(0));

  // Simulation equivalence with matched noise realizations.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomDt r = random_dt(rng, 3);
    const NormalizedModel n = normalize_noise(r.model);
    const VectorXd mid_w = 0.5 * (r.model.w_lo + r.model.w_hi);
    const VectorXd half_w = 0.5 * (r.model.w_hi - r.model.w_lo);
    const VectorXd mid_v = 0.5 * (r.model.v_lo + r.model.v_hi);
    const VectorXd half_v = 0.5 * (r.model.v_hi - r.model.v_lo);
    VectorXd x = VectorXd::Constant(3, 0.3), xn = x;
    for (int k = 0; k < 30; ++k) {
      VectorXd s(2), sv(1);
      s << 2 * u(rng) - 1, 2 * u(rng) - 1;
      sv << 2 * u(rng) - 1;
      const VectorXd w = mid_w + half_w.cwiseProduct(s);
      const VectorXd v = mid_v + half_v.cwiseProduct(sv);
      const VectorXd uu = VectorXd::Constant(1, std::sin(k));
      const VectorXd y = r.model.C * x + r.model.D * uu + r.model.V * v;
      const VectorXd yn = n.model.C * xn + n.model.D * uu + n.model.V * sv + n.output_offset;
      CHECK((y - yn).cwiseAbs().maxCoeff() <= 1e-12);
      x = r.model.A * x + r.model.B * uu + r.model.W * w;
      xn = n.model.A * xn + n.model.B * uu + n.model.W * s + n.state_offset;
    }
    CHECK((x - xn).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("build_embedding splits") {
  SystemModel m;
  m.A = MatrixXd{{-4, 1.732}, {-1.732, -4}};
  m.B.resize(2, 0);
  m.W.resize(2, 0);
  m.C.resize(0, 2);
  m.D.resize(0, 0);
  m.V.resize(0, 0);
  m.x0_lo = VectorXd::Zero(2);
  m.x0_hi = VectorXd::Ones(2);
  const ClosedLoop cl = validate_gain(m, MatrixXd(2, 0));
  const auto dyn = build_embedding(cl, manual_pair(MatrixXd::Identity(2, 2), m.A, TimeDomain::CT));
  CHECK(dyn.Qup == MatrixXd{{-4, 1.732}, {0, -4}});
  CHECK(dyn.Qdown == MatrixXd{{0, 0}, {1.732, 0}});

  SystemModel mdt = m;
  mdt.domain = TimeDomain::DT;
  mdt.A = MatrixXd{{0.2, 0.1}, {0.3, 0.4}};
  const ClosedLoop cdt = validate_gain(mdt, MatrixXd(2, 0));
  const auto ddt = build_embedding(cdt, manual_pair(MatrixXd::Identity(2, 2), mdt.A, TimeDomain::DT));
  CHECK(ddt.Qup == mdt.A);
  CHECK(ddt.Qdown.isZero(0));

  CHECK(code_of([&] {
          build_embedding(cl, manual_pair(MatrixXd::Identity(2, 2), m.A, TimeDomain::DT));
        }) == ErrorCode::DomainMismatch);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd Q = fixtures::random_matrix(rng, 2, 2);
    for (auto d : {TimeDomain::CT, TimeDomain::DT}) {
      ClosedLoop c = trial % 2 ? cdt : cl;
      c.model.domain = d;
      const auto e = build_embedding(c, manual_pair(MatrixXd::Identity(2, 2), Q, d));
      CHECK((e.Qup - e.Qdown) == Q);
      CHECK((e.Qdown.array() >= 0).all());
      if (d == TimeDomain::CT) {
        CHECK(e.Qdown.diagonal().isZero(0));
      } else {
        CHECK((e.Qup.array() >= 0).all());
      }
    }
  }
}

TEST_CASE("noise offsets follow the sign-split formulas") {
  std::mt19937_64 rng(13);
  const RandomDt r = random_dt(rng, 3);
  const ClosedLoop cl = validate_gain(r.model, r.L);
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::DT);
  const auto dyn = build_embedding(cl, tp);
  const MatrixXd PW = tp.P * r.model.W, PLV = tp.P * r.L * r.model.V;
  // Oracle: the extreme values of PW w - PLV v over the noise box, row by row.
  for (int i = 0; i < tp.m(); ++i) {
    double lo = 0, hi = 0;
    for (int j = 0; j < PW.cols(); ++j) {
      const double a = PW(i, j) * r.model.w_lo(j), b = PW(i, j) * r.model.w_hi(j);
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    for (int j = 0; j < PLV.cols(); ++j) {
      const double a = -PLV(i, j) * r.model.v_lo(j), b = -PLV(i, j) * r.model.v_hi(j);
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    CHECK(dyn.lower_offset(i) == doctest::Approx(lo).epsilon(1e-12));
    CHECK(dyn.upper_offset(i) == doctest::Approx(hi).epsilon(1e-12));
    CHECK(dyn.f_eps(i) == doctest::Approx(hi - lo).epsilon(1e-12));
  }
}

TEST_CASE("DT step: degenerate interval propagates the true lifted state") {
  SystemModel m = meslem_model();
  m.w_lo(0) = m.w_hi(0) = 0.25;
  const ClosedLoop cl = validate_gain(m, fixtures::meslem_L());
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::DT);
  const auto dyn = build_embedding(cl, tp);
  VectorXd x{{-0.3, -0.5, 0.6, 0.9, -0.2}};
  FramerState s{tp.P * x, tp.P * x, 0};
  const VectorXd u(0);
  for (int k = 0; k < 10; ++k) {
    const VectorXd y = m.C * x;
    s = step_embedding_dt(dyn, s, y, u);
    x = m.A * x + m.W * VectorXd::Constant(1, 0.25);
    CHECK((s.z_lo - tp.P * x).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((s.z_hi - tp.P * x).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("DT step encloses corners and sampled noise from the initial box") {
  const SystemModel m = meslem_model();
  const ClosedLoop cl = validate_gain(m, fixtures::meslem_L());
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::DT);
  const auto dyn = build_embedding(cl, tp);
  const FramerState s0 = initial_framer(tp, m);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<VectorXd> starts;
  for (int mask = 0; mask < 32; ++mask) {
    VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    starts.push_back(x);
  }
  for (int k = 0; k < 100; ++k) starts.push_back(fixtures::random_matrix(rng, 5, 1));
  for (const VectorXd& x0 : starts) {
    for (int trial = 0; trial < 3; ++trial) {
      const double w = u(rng);
      const VectorXd y = m.C * x0;
      const FramerState s1 = step_embedding_dt(dyn, s0, y, VectorXd(0));
      const VectorXd z0 = tp.P * x0;
      const VectorXd z1 = tp.P * (m.A * x0 + m.W * VectorXd::Constant(1, w));
      CHECK(((z0 - s0.z_lo).array() >= 0).all());
      CHECK(((s0.z_hi - z0).array() >= 0).all());
      CHECK(((z1 - s1.z_lo).array() >= 0).all());
      CHECK(((s1.z_hi - z1).array() >= 0).all());
    }
  }
}

TEST_CASE("DT width follows the explicit error recursion") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomDt r = random_dt(rng, 2 + trial % 4);
    const ClosedLoop cl = validate_gain(r.model, r.L);
    const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::DT);
    const auto dyn = build_embedding(cl, tp);
    FramerState s = initial_framer(tp, r.model);
    VectorXd eps = s.width();
    const MatrixXd absQ = tp.Q.cwiseAbs();
    const VectorXd f = (tp.P * r.model.W).cwiseAbs() * (r.model.w_hi - r.model.w_lo) +
                       (tp.P * r.L * r.model.V).cwiseAbs() * (r.model.v_hi - r.model.v_lo);
    for (int k = 0; k < 15; ++k) {
      s = step_embedding_dt(dyn, s, fixtures::random_matrix(rng, 1, 1), VectorXd::Constant(1, 0.5));
      eps = absQ * eps + f;
      CHECK((s.width() - eps).cwiseAbs().maxCoeff() <= 1e-10 * (1 + eps.maxCoeff()));
    }
  }
}

TEST_CASE("stepping checks the domain and the order") {
  const ClosedLoop cl = validate_gain(raissi_model(), fixtures::raissi_L());
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::CT);
  const auto dyn = build_embedding(cl, tp);
  const FramerState s = initial_framer(tp, raissi_model());
  CHECK(code_of([&] { step_embedding_dt(dyn, s, VectorXd::Zero(1), VectorXd(0)); }) ==
        ErrorCode::DomainMismatch);
  FramerState bad = s;
  bad.z_lo(0) = bad.z_hi(0) + 1;
  CHECK(code_of([&] { check_order(bad, 1e-9); }) == ErrorCode::OrderViolation);
  const Signal zero = [](double) { return VectorXd::Zero(1); };
  const Signal none = [](double) { return VectorXd(0); };
  CHECK(code_of([&] { integrate_embedding_ct(dyn, s, zero, none, 1.0, 2); }) ==
        ErrorCode::StepTooLarge);
}

TEST_CASE("CT integration: zero-noise degenerate framers equal the lifted RK4 trajectory") {
  SystemModel m = raissi_model();
  m.w_lo(0) = m.w_hi(0) = 0;
  const ClosedLoop cl = validate_gain(m, fixtures::raissi_L());
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::CT);
  const auto dyn = build_embedding(cl, tp);
  // Output held at zero, so the lifted dynamics are z' = Q z.
  const VectorXd z0 = tp.P * VectorXd{{0.5, 0.3, 0.7}};
  const Signal zero = [](double) { return VectorXd::Zero(1); };
  const Signal none = [](double) { return VectorXd(0); };
  const auto traj = integrate_embedding_ct(dyn, {z0, z0, 0}, zero, none, 1e-3, 1000);
  VectorXd z = z0;
  auto f = [&](double, const VectorXd& v) -> VectorXd { return tp.Q * v; };
  for (int k = 1; k <= 1000; ++k) {
    z = rk4_step(f, 0.0, z, 1e-3);
    CHECK((traj.states[k].z_lo - z).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((traj.states[k].z_hi - z).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("CT integration encloses the exact solution and stays under the ISS curve") {
  // Closed-form solution of x' = A x + W sin(15 t): homogeneous part through
  // the complex eigendecomposition plus the steady sinusoidal response.
  const SystemModel m = raissi_model();
  const ClosedLoop cl = validate_gain(m, fixtures::raissi_L());
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::CT);
  const auto dyn = build_embedding(cl, tp);
  using cd = std::complex<double>;
  const Eigen::EigenSolver<MatrixXd> es(m.A);
  const Eigen::MatrixXcd V = es.eigenvectors(), Vinv = V.inverse();
  const Eigen::VectorXcd lam = es.eigenvalues();
  const double w = 15;
  const Eigen::VectorXcd g =
      (cd(0, w) * Eigen::MatrixXcd::Identity(3, 3) - m.A.cast<cd>()).inverse() * m.W.cast<cd>();
  auto particular = [&](double t) -> VectorXd {
    return (g * std::exp(cd(0, w * t))).imag();
  };
  const VectorXd x0{{0.5, 0.3, 0.7}};
  const Eigen::VectorXcd c0 = Vinv * (x0 - particular(0)).cast<cd>();
  auto exact = [&](double t) -> VectorXd {
    Eigen::VectorXcd e(3);
    for (int i = 0; i < 3; ++i) e(i) = std::exp(lam(i) * t) * c0(i);
    return (V * e).real() + particular(t);
  };
  const Signal y_fn = [&](double t) { return (m.C * exact(t)).eval(); };
  const Signal none = [](double) { return VectorXd(0); };
  const FramerState s0 = initial_framer(tp, m);
  const double eps0 = s0.width().maxCoeff();
  const auto traj = integrate_embedding_ct(dyn, s0, y_fn, none, 1e-3, 5000);
  for (std::size_t k = 0; k < traj.states.size(); k += 10) {
    const auto& s = traj.states[k];
    const VectorXd z = tp.P * exact(s.t);
    CHECK(((z - s.z_lo).array() >= -1e-6).all());
    CHECK(((s.z_hi - z).array() >= -1e-6).all());
    CHECK(s.width().maxCoeff() <= iss_bound(dyn, eps0, s.t) + 1e-6);
  }
}

TEST_CASE("polytope_estimate") {
  const SystemModel m = raissi_model();
  const ClosedLoop cl = validate_gain(m, fixtures::raissi_L());
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::CT);
  const VectorXd x{{0.5, 0.3, 0.7}};
  const FramerState s{tp.P * x, tp.P * x, 0};
  const VectorXd y = m.C * x;
  const PolytopeH p = polytope_estimate(tp, m, s, y, VectorXd(0));
  CHECK(p.rows() == 2 * tp.m() + 2 * m.l());
  CHECK((p.k - p.H * x).minCoeff() >= -1e-12);
  // Output rows reduce to C x = y.
  CHECK(p.H.row(2 * tp.m()) == m.C.row(0));
  CHECK(p.H.row(2 * tp.m() + 1) == -m.C.row(0));
  CHECK(p.k(2 * tp.m()) == y(0));
  CHECK(p.k(2 * tp.m() + 1) == -y(0));

  const IntervalBox box{VectorXd::Zero(3), VectorXd::Ones(3)};
  const PolytopeH pb = polytope_estimate(tp, m, s, y, VectorXd(0), box);
  CHECK(pb.rows() == p.rows() + 6);
}

TEST_CASE("output bounds with measurement noise") {
  SystemModel m;
  m.A = MatrixXd{{-1}};
  m.B = MatrixXd{{1}};
  m.W.resize(1, 0);
  m.C = MatrixXd{{1}};
  m.D = MatrixXd{{2}};
  m.V = MatrixXd{{1, -3}};
  m.v_lo = VectorXd{{-1, 0}};
  m.v_hi = VectorXd{{2, 1}};
  const auto [lo, hi] = output_bounds(m, VectorXd{{10}}, VectorXd{{1}});
  // C x = y - D u - V v with V v in [-1 - 3, 2 - 0] = [-4, 2].
  CHECK(lo(0) == doctest::Approx(10 - 2 - 2));
  CHECK(hi(0) == doctest::Approx(10 - 2 + 4));
}

TEST_CASE("interval_estimate") {
  // Orthonormal square P~, degenerate framers.
  SystemModel m;
  m.A = MatrixXd{{-1, 0}, {0, -2}};
  m.B.resize(2, 0);
  m.W.resize(2, 0);
  m.C.resize(0, 2);
  m.D.resize(0, 0);
  m.V.resize(0, 0);
  const double c = std::cos(0.3), s = std::sin(0.3);
  const MatrixXd R{{c, -s}, {s, c}};
  const TransformPair tp = manual_pair(R, MatrixXd::Identity(2, 2), TimeDomain::CT);
  const VectorXd b{{0.4, -1.2}};
  const IntervalBox box = interval_estimate(tp, m, {b, b, 0}, VectorXd(0), VectorXd(0));
  CHECK((box.lo - R.transpose() * b).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((box.hi - R.transpose() * b).cwiseAbs().maxCoeff() <= 1e-14);

  // Width monotonicity under framer widening.
  std::mt19937_64 rng(4);
  const SystemModel rm = raissi_model();
  const ClosedLoop cl = validate_gain(rm, fixtures::raissi_L());
  const TransformPair rtp = synthesize_transform(cl.A_cl, TimeDomain::CT);
  const IntervalMap map = make_interval_map(rtp, rm);
  CHECK((map.pinv_plus - map.pinv_minus) == map.pinv);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd lo = fixtures::random_matrix(rng, 3, 1);
    const FramerState f{lo, (lo.array() + 0.5).matrix(), 0};
    const VectorXd y = fixtures::random_matrix(rng, 1, 1);
    const IntervalBox a = interval_estimate(map, rm, f, y, VectorXd(0));
    const FramerState g{(f.z_lo.array() - 0.1).matrix(), (f.z_hi.array() + 0.1).matrix(), 0};
    const IntervalBox b2 = interval_estimate(map, rm, g, y, VectorXd(0));
    CHECK(((b2.hi - a.hi).array() >= -1e-14).all());
    CHECK(((a.lo - b2.lo).array() >= -1e-14).all());
  }
}

TEST_CASE("interval box contains the polytope (Monte Carlo)") {
  // Measurement noise gives the output slab a nonzero width.
  SystemModel m = raissi_model();
  m.V = MatrixXd{{1}};
  m.v_lo = VectorXd{{-0.05}};
  m.v_hi = VectorXd{{0.05}};
  const ClosedLoop cl = validate_gain(m, fixtures::raissi_L());
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::CT);
  const auto dyn = build_embedding(cl, tp);
  const Signal y_fn = [](double t) { return VectorXd::Constant(1, 0.5 + 0.1 * std::sin(t)); };
  const Signal none = [](double) { return VectorXd(0); };
  const auto traj = integrate_embedding_ct(dyn, initial_framer(tp, m), y_fn, none, 1e-3, 1000);
  const FramerState& s = traj.states.back();
  const VectorXd y = y_fn(s.t);
  const PolytopeH poly = polytope_estimate(tp, m, s, y, VectorXd(0));
  const IntervalBox box = interval_estimate(tp, m, s, y, VectorXd(0));
  const IntervalBox region{box.lo - box.width(), box.hi + box.width()};
  UnitCubeSampler sampler(3, 10000, 1);
  const auto [escaped, inside] = sampler.escapes(poly, region, box, 1e-12);
  CHECK(inside > 0);
  CHECK(escaped == 0);
}

TEST_CASE("iss_bound") {
  const ClosedLoop cl = validate_gain(raissi_model(), fixtures::raissi_L());
  const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::CT);
  const auto dyn = build_embedding(cl, tp);
  CHECK(iss_bound(dyn, 0.7, 0) == doctest::Approx(0.7));
  CHECK(iss_bound(tp, cl, 0.7, 0) == doctest::Approx(0.7));
  const double mu = mu_inf(tp.Q), f = dyn.f_eps.maxCoeff();
  CHECK(iss_bound(dyn, 0.7, 2) == doctest::Approx(std::exp(2 * mu) * 0.7 + (std::exp(2 * mu) - 1) / mu * f));

  SystemModel quiet = raissi_model();
  quiet.w_lo(0) = quiet.w_hi(0) = 0;
  const auto qd = build_embedding(validate_gain(quiet, fixtures::raissi_L()), tp);
  double prev = iss_bound(qd, 1.0, 0);
  for (int k = 1; k < 50; ++k) {
    const double b = iss_bound(qd, 1.0, 0.1 * k);
    CHECK(b == doctest::Approx(std::exp(mu * 0.1 * k)));
    CHECK(b < prev);
    prev = b;
  }

  // DT ultimate bound with the printed contraction factor.
  const ClosedLoop dcl = validate_gain(meslem_model(), fixtures::meslem_L());
  TransformPair dtp = synthesize_transform(dcl.A_cl, TimeDomain::DT);
  const auto ddyn = build_embedding(dcl, dtp);
  const double q = norm_inf(dtp.Q), fd = ddyn.f_eps.maxCoeff();
  CHECK(q == doctest::Approx(0.7288).epsilon(1e-4));
  CHECK(iss_bound(ddyn, 2.0, 1e4) == doctest::Approx(fd / (1 - q)).epsilon(1e-12));
  CHECK(1 / (1 - q) == doctest::Approx(3.688).epsilon(1e-3));
}
