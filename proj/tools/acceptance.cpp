// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "polyobs/simulation.hpp"

using namespace polyobs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

MatrixXd raissi_Acl() { return fixtures::raissi_A() - fixtures::raissi_L() * fixtures::raissi_C(); }
MatrixXd meslem_Acl() { return fixtures::meslem_A() - fixtures::meslem_L() * fixtures::meslem_C(); }

Scenario bundled(const std::string& name) { return load_scenario(fixtures::scenario_path(name)); }

Scenario zero_noise(Scenario sc) {
  sc.model.w_lo.setZero();
  sc.model.w_hi.setZero();
  sc.model.v_lo.setZero();
  sc.model.v_hi.setZero();
  return sc;
}

Outcome ct_transform() {
  const auto t0 = Clock::now();
  const MatrixXd Acl = raissi_Acl();
  const TransformPair tp = synthesize_transform(Acl, TimeDomain::CT);
  const double dt = seconds_since(t0);
  const MatrixXd P = fixtures::raissi_P_printed(), Q = fixtures::raissi_Q_printed();
  const double res = norm_inf((tp.P * Acl - tp.Q * tp.P).eval());
  const double printed = norm_inf((P * Acl - Q * P).eval());
  const double mu = mu_inf(tp.Q);
  return {tp.m() == 3 && res <= 1e-8 && mu <= -2.0 && printed <= 5e-2 && dt < 1.0,
          fmt("m=%d residual=%.2e mu=%.4f printed residual=%.2e, %.3fs", int(tp.m()), res, mu,
              printed, dt)};
}

Outcome chua_lifting() {
  const auto t0 = Clock::now();
  const Spectrum<double> s = eig_real(fixtures::chua_A());
  if (s.complex_pairs.size() != 1) return {false, "expected one complex pair"};
  const int m = min_block_size_ct(s.complex_pairs[0].sigma, s.complex_pairs[0].omega);
  const double dt = seconds_since(t0);
  return {m == 10 && dt < 0.1, fmt("m=%d, %.4fs", m, dt)};
}

Outcome dt_transform() {
  const auto t0 = Clock::now();
  const MatrixXd Acl = meslem_Acl();
  const TransformPair tp = synthesize_transform(Acl, TimeDomain::DT);
  const double dt = seconds_since(t0);
  const MatrixXd Q = fixtures::meslem_Q_printed();
  const double qn = norm_inf(Q);
  // Printed structure: one real entry then two 2x2 blocks [[a, b], [-b, a]].
  bool structure = true;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const bool in_block = i == j || (i > 0 && (i - 1) / 2 == (j - 1) / 2 && j > 0);
      if (!in_block && Q(i, j) != 0) structure = false;
    }
  for (int b : {1, 3}) {
    structure = structure && Q(b, b) == Q(b + 1, b + 1) && Q(b, b + 1) == -Q(b + 1, b) &&
                Q(b, b + 1) != 0;
  }
  const bool plan = tp.plan.real.size() == 1 && tp.plan.complex.size() == 2;
  const bool pass = tp.m() == 5 && norm_inf(tp.Q) < 1 && std::abs(qn - 0.7288) <= 1e-4 &&
                    structure && plan && dt < 1.0;
  return {pass, fmt("m=%d ||Q||=%.4f printed ||Q||=%.4f structure=%s, %.3fs", int(tp.m()),
                    norm_inf(tp.Q), qn, structure && plan ? "ok" : "bad", dt)};
}

// Random admissible noise: every channel draws uniformly from its bounds.
Scenario randomized(Scenario sc, std::uint64_t seed) {
  for (std::size_t i = 0; i < sc.w_signals.size(); ++i) {
    sc.w_signals[i] = SignalSpec::uniform_random(seed * 1000 + i);
  }
  for (std::size_t i = 0; i < sc.v_signals.size(); ++i) {
    sc.v_signals[i] = SignalSpec::uniform_random(seed * 1000 + 500 + i);
  }
  return sc;
}

Outcome correctness() {
  const auto t0 = Clock::now();
  RunOptions opt;
  opt.volumes = false;
  opt.projections = false;
  opt.containment_every_sample = true;
  long runs = 0, checks = 0;
  double worst = std::numeric_limits<double>::infinity();
  try {
    for (const char* name : {"raissi_ct", "chua_ct", "meslem_dt"}) {
      const Scenario base = bundled(name);
      if (base.mc_samples != 10000) return {false, std::string(name) + ": mc.samples is not 1e4"};
      for (std::uint64_t k = 1; k <= 20; ++k) {
        const RunArtifacts a = run_scenario(randomized(base, k), opt);
        if (a.containment_checks != long(a.samples.size())) {
          return {false, std::string(name) + ": containment not checked at every sample"};
        }
        worst = std::min(worst, a.min_membership_slack);
        checks += a.containment_checks;
        ++runs;
      }
    }
  } catch (const Error& e) {
    return {false, e.what()};
  }
  const double dt = seconds_since(t0);
  return {worst >= -1e-6 && dt < 60,
          fmt("%ld runs, %ld containment checks, min slack=%.2e, %.1fs", runs, checks, worst, dt)};
}

Outcome iss() {
  RunOptions opt;
  opt.volumes = false;
  opt.projections = false;
  std::string detail;
  bool pass = true;
  for (const char* name : {"raissi_ct", "chua_ct", "meslem_dt"}) {
    const RunArtifacts a = run_scenario(bundled(name), opt);
    pass = pass && a.max_iss_excess <= 1e-6;
    detail += fmt("%s excess=%.1e ", name, a.max_iss_excess);
  }
  for (const char* name : {"raissi_ct", "meslem_dt"}) {
    const RunArtifacts a = run_scenario(zero_noise(bundled(name)), opt);
    const double ratio = a.samples.back().eps_norm / a.eps0_norm;
    pass = pass && ratio <= 1e-3 && a.max_iss_excess <= 1e-6;
    detail += fmt("%s zero-noise ratio=%.1e ", name, ratio);
  }
  detail.pop_back();
  return {pass, detail};
}

Outcome lemma1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    const MatrixXd M = fixtures::random_matrix(rng, n, n, 5.0);
    if (mu_inf(M) != mu_inf(metzlerize(M))) ++bad;
    if (norm_inf(M) != norm_inf(M.cwiseAbs().eval())) ++bad;
  }
  const double dt = seconds_since(t0);
  return {bad == 0 && dt < 1.0, fmt("%d mismatches, %.3fs", bad, dt)};
}

Outcome framer_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1, 1);
  long trajectories = 0, violations = 0;
  int systems = 0;
  while (systems < 200) {
    SystemModel m;
    m.A = fixtures::planted(rng, 3, true).A;
    m.B = fixtures::random_matrix(rng, 3, 1);
    m.W = fixtures::random_matrix(rng, 3, 2);
    m.C = fixtures::random_matrix(rng, 1, 3);
    m.D = fixtures::random_matrix(rng, 1, 1);
    m.V = fixtures::random_matrix(rng, 1, 1);
    m.domain = TimeDomain::DT;
    m.w_lo = VectorXd{{-1, -0.5}};
    m.w_hi = VectorXd{{1, 0.25}};
    m.v_lo = VectorXd{{-0.1}};
    m.v_hi = VectorXd{{0.1}};
    m.x0_lo = VectorXd::Constant(3, -1);
    m.x0_hi = VectorXd::Constant(3, 1);
    const MatrixXd L = fixtures::random_matrix(rng, 3, 1, 0.2);
    ClosedLoop cl;
    try {
      cl = validate_gain(m, L);
    } catch (const Error&) {
      continue;
    }
    ++systems;
    const TransformPair tp = synthesize_transform(cl.A_cl, TimeDomain::DT);
    const EmbeddingDynamics dyn = build_embedding(cl, tp);
    const FramerState s0 = initial_framer(tp, m);
    for (int corner = 0; corner < 8; ++corner) {
      VectorXd x0(3);
      for (int i = 0; i < 3; ++i) x0(i) = (corner >> i) & 1 ? 1.0 : -1.0;
      for (int seq = 0; seq < 50; ++seq) {
        VectorXd x = x0;
        FramerState s = s0;
        for (int k = 0; k < 20; ++k) {
          const VectorXd z = tp.P * x;
          if (((z - s.z_lo).array() < 0).any() || ((s.z_hi - z).array() < 0).any()) {
            ++violations;
            break;
          }
          VectorXd w(2), v(1), uu(1);
          w << m.w_lo(0) + (m.w_hi(0) - m.w_lo(0)) * 0.5 * (1 + u(rng)),
              m.w_lo(1) + (m.w_hi(1) - m.w_lo(1)) * 0.5 * (1 + u(rng));
          v << 0.1 * u(rng);
          uu << std::sin(0.3 * k);
          const VectorXd y = m.C * x + m.D * uu + m.V * v;
          s = step_embedding_dt(dyn, s, y, uu);
          x = m.A * x + m.B * uu + m.W * w;
        }
        ++trajectories;
      }
    }
  }
  const double dt = seconds_since(t0);
  return {violations == 0 && dt < 10,
          fmt("%ld trajectories, %ld violations, %.2fs", trajectories, violations, dt)};
}

Outcome synthesis_sweep() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  int failures = 0, square_expected = 0, square_miss = 0;
  std::string first;
  for (bool dt : {false, true}) {
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + trial % 5;
      const MatrixXd A = fixtures::planted(rng, n, dt, 1e6).A;
      const TimeDomain d = dt ? TimeDomain::DT : TimeDomain::CT;
      try {
        const TransformPair tp = synthesize_transform(A, d);
        const double tol = 1e-7 * std::max(1.0, norm_inf(A));
        const bool ok = norm_inf((tp.P * A - tp.Q * tp.P).eval()) <= tol &&
                        Eigen::FullPivLU<MatrixXd>(tp.P).rank() == n &&
                        (dt ? norm_inf(tp.Q) < 1 : mu_inf(tp.Q) < 0) &&
                        tp.m() == tp.plan.lifted_dim();
        if (!ok) {
          ++failures;
          continue;
        }
        bool all_square = true;
        for (const auto& c : tp.plan.complex) all_square = all_square && square_case(c.sigma, c.omega, d);
        if (all_square) {
          ++square_expected;
          if (tp.m() != n) ++square_miss;
        }
      } catch (const Error& e) {
        if (first.empty()) first = e.what();
        ++failures;
      }
    }
  }
  const double secs = seconds_since(t0);
  std::string detail = fmt("%d failures, %d square cases (%d with m != n), %.2fs", failures,
                           square_expected, square_miss, secs);
  if (!first.empty()) detail += "; first error: " + first;
  return {failures == 0 && square_miss == 0 && secs < 30, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome geometry() {
  const PolytopeH simplex{MatrixXd{{-1, 0}, {0, -1}, {1, 1}}, VectorXd{{0, 0, 1}}};
  const IntervalBox unit{VectorXd::Zero(2), VectorXd::Ones(2)};
  const VolumeEstimate v = volume_mc(simplex, unit, 1000000, 5);
  const bool volume_ok = std::abs(v.estimate - 0.5) <= 3 * v.std_error;

  const IntervalBox box{VectorXd{{-1, 0.5, 2}}, VectorXd{{3, 1.5, 2.5}}};
  const Polygon2D rect = project2d_outer(to_polytope(box), {0, 1}, 16);
  bool rect_ok = rect.vertices.size() == 4 && std::abs(polygon_area(rect) - 4.0) <= 1e-12;
  for (const auto& p : rect.vertices) {
    rect_ok = rect_ok && (std::abs(p.x() + 1) <= 1e-12 || std::abs(p.x() - 3) <= 1e-12) &&
              (std::abs(p.y() - 0.5) <= 1e-12 || std::abs(p.y() - 1.5) <= 1e-12);
  }

  bool rerun_ok = volume_mc(simplex, unit, 1000000, 5).estimate == v.estimate;
  const fs::path root = fs::temp_directory_path() / "polyobs_acceptance";
  fs::remove_all(root);
  const Scenario sc = bundled("meslem_dt");
  const auto files = write_outputs(run_scenario(sc), (root / "a").string());
  write_outputs(run_scenario(sc), (root / "b").string());
  for (const auto& f : files) rerun_ok = rerun_ok && slurp(root / "a" / f) == slurp(root / "b" / f);
  fs::remove_all(root);
  return {volume_ok && rect_ok && rerun_ok,
          fmt("simplex=%.5f+-%.5f rectangle=%s reruns=%s", v.estimate, v.std_error,
              rect_ok ? "exact" : "wrong", rerun_ok ? "identical" : "differ")};
}

Outcome lifting_order() {
  Scenario sc = zero_noise(bundled("chua_ct"));
  sc.horizon = 1;
  sc.projection_times.clear();
  RunOptions opt;
  opt.volumes = false;
  opt.projections = false;
  std::vector<double> vol;
  for (int m : {10, 20, 30}) {
    sc.transform.m_override_all = m;
    vol.push_back(run_scenario(sc, opt).samples.back().box_volume);
  }
  return {vol[1] <= vol[0] && vol[2] <= vol[1],
          fmt("box volume at 1s: m=10 %.6g, m=20 %.6g, m=30 %.6g", vol[0], vol[1], vol[2])};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"CT transform existence", ct_transform},
      {"Chua minimal lifting", chua_lifting},
      {"DT transform", dt_transform},
      {"enclosure under random noise", correctness},
      {"ISS envelope and zero-noise decay", iss},
      {"Lemma 1 property suite", lemma1},
      {"embedding framer oracle", framer_oracle},
      {"random synthesis sweep", synthesis_sweep},
      {"geometry oracles", geometry},
      {"lifting order", lifting_order},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
