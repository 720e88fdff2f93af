#include "polyobs/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "polyobs/matrix_io.hpp"
#include "polyobs/ode.hpp"

namespace polyobs {

using Eigen::Index;

namespace {

VectorXd eval_group(const std::vector<SignalSpec>& specs, const VectorXd& lo, const VectorXd& hi,
                    double t, double step) {
  VectorXd out(Index(specs.size()));
  for (Index k = 0; k < out.size(); ++k) {
    const double l = lo.size() ? lo(k) : -std::numeric_limits<double>::infinity();
    const double h = hi.size() ? hi(k) : std::numeric_limits<double>::infinity();
    out(k) = eval_signal(specs[std::size_t(k)], t, l, h, step);
  }
  return out;
}

VectorXd measure(const SystemModel& m, const VectorXd& x, const VectorXd& u, const VectorXd& v) {
  return m.C * x + m.D * u + m.V * v;
}

double min_slack(const PolytopeH& poly, const VectorXd& x) {
  if (poly.rows() == 0) return std::numeric_limits<double>::infinity();
  return (poly.k - poly.H * x).minCoeff();
}

// Box enlarged by half its width on each side; the sampling region for
// containment checks.
IntervalBox enlarge(const IntervalBox& b) {
  const VectorXd scale = b.lo.cwiseAbs().cwiseMax(b.hi.cwiseAbs()).array() + 1.0;
  const VectorXd pad = (0.5 * b.width()).cwiseMax(1e-6 * scale);
  return {b.lo - pad, b.hi + pad};
}

double box_tol(const IntervalBox& b) {
  return 1e-9 * (1.0 + std::max(b.lo.cwiseAbs().maxCoeff(), b.hi.cwiseAbs().maxCoeff()));
}

std::string time_label(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

}  // namespace

VectorXd eval_w(const Scenario& sc, double t) {
  return eval_group(sc.w_signals, sc.model.w_lo, sc.model.w_hi, t, sc.step());
}

VectorXd eval_v(const Scenario& sc, double t) {
  return eval_group(sc.v_signals, sc.model.v_lo, sc.model.v_hi, t, sc.step());
}

VectorXd eval_u(const Scenario& sc, double t) {
  return eval_group(sc.u_signals, VectorXd(), VectorXd(), t, sc.step());
}

TrueTrajectory simulate_true(const Scenario& sc) {
  const SystemModel& m = sc.model;
  TrueTrajectory tr;
  const long N = sc.samples();
  const double h = sc.step();
  VectorXd x = sc.x0_true;
  auto f = [&](double t, const VectorXd& s) -> VectorXd {
    return m.A * s + m.B * eval_u(sc, t) + m.W * eval_w(sc, t);
  };
  for (long k = 0; k < N; ++k) {
    const double t = k * h;
    const VectorXd w = eval_w(sc, t), v = eval_v(sc, t), u = eval_u(sc, t);
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.y.push_back(measure(m, x, u, v));
    tr.w.push_back(w);
    tr.v.push_back(v);
    tr.u.push_back(u);
    if (k + 1 == N) break;
    if (m.domain == TimeDomain::DT) {
      x = m.A * x + m.B * u + m.W * w;
    } else {
      x = rk4_step(f, t, x, h);
    }
  }
  return tr;
}

RunArtifacts run_scenario(const Scenario& sc, const RunOptions& opt) {
  sc.validate();
  const SystemModel& model = sc.model;
  const ClosedLoop cl = validate_gain(model, sc.L);
  RunArtifacts out;
  out.scenario_name = sc.name;
  out.scenario_hash = scenario_hash(sc);
  out.transform = opt.transform ? *opt.transform : synthesize_transform(cl.A_cl, model.domain,
                                                                        sc.synthesis_options());
  const TransformPair& tp = out.transform;
  if (tp.domain != model.domain) {
    throw Error(ErrorCode::DomainMismatch, "run_scenario: transform domain differs from the model");
  }
  if ((tp.P * cl.A_cl - tp.Q * tp.P).cwiseAbs().maxCoeff() >
      1e-6 * (1.0 + norm_inf(cl.A_cl)) * (1.0 + norm_inf(tp.P))) {
    throw Error(ErrorCode::ResidualTooLarge, "run_scenario: transform does not match A - LC");
  }
  out.dynamics = build_embedding(cl, tp);
  const EmbeddingDynamics& dyn = out.dynamics;
  const IntervalMap imap = make_interval_map(tp, model);
  const Index n = model.n(), mz = tp.m();
  const double h = sc.step();
  const long N = sc.samples();

  if (model.domain == TimeDomain::CT && !(h * mu_inf(metzlerize(dyn.Q)) > -2)) {
    throw Error(ErrorCode::StepTooLarge, "run_scenario: dt too large for the explicit scheme");
  }

  std::optional<UnitCubeSampler> sampler;
  if (opt.volumes || opt.projections || opt.containment_every_sample) {
    sampler.emplace(n, sc.mc_samples, sc.mc_seed);
  }

  std::vector<std::size_t> projection_samples;
  for (double t : sc.projection_times) {
    projection_samples.push_back(std::size_t(std::llround(t / h)));
  }

  const FramerState s0 = initial_framer(tp, model);
  out.eps0_norm = mz ? s0.width().cwiseAbs().maxCoeff() : 0.0;
  out.min_membership_slack = std::numeric_limits<double>::infinity();
  out.max_iss_excess = -std::numeric_limits<double>::infinity();

  auto check_containment = [&](const PolytopeH& poly, const IntervalBox& box, double t) {
    const auto [escaped, inside] = sampler->escapes(poly, enlarge(box), box, box_tol(box));
    ++out.containment_checks;
    if (escaped > 0) {
      std::ostringstream os;
      os << "polytope estimate leaves the interval estimate at t=" << t << " (" << escaped
         << " of " << inside << " accepted samples)";
      throw Error(ErrorCode::EnclosureViolation, os.str());
    }
    return std::pair<long, long>{escaped, inside};
  };

  auto record = [&](std::size_t k, const FramerState& s, const VectorXd& x, const VectorXd& y,
                    const VectorXd& u) {
    SampleRecord r;
    r.t = k * h;
    r.framer = s;
    r.framer.t = model.domain == TimeDomain::CT ? r.t : double(k);
    r.box = interval_estimate(imap, model, s, y, u);
    r.eps_norm = mz ? s.width().cwiseAbs().maxCoeff() : 0.0;
    r.iss = iss_bound(dyn, out.eps0_norm, r.t);
    r.box_volume = volume_box(r.box);
    const PolytopeH poly = polytope_estimate(tp, model, s, y, u);
    r.membership_slack = min_slack(poly, x);
    out.min_membership_slack = std::min(out.min_membership_slack, r.membership_slack);
    out.max_iss_excess = std::max(out.max_iss_excess, r.eps_norm - r.iss);

    if (opt.enforce_enclosure) {
      const bool in_box = ((x - r.box.lo).array() >= -opt.enclosure_tol).all() &&
                          ((r.box.hi - x).array() >= -opt.enclosure_tol).all();
      if (r.membership_slack < -opt.enclosure_tol || !in_box) {
        std::ostringstream os;
        os << "true state escapes the estimate at t=" << r.t << " (membership slack "
           << r.membership_slack << (in_box ? "" : ", outside the interval box") << ")";
        throw Error(ErrorCode::EnclosureViolation, os.str());
      }
    }
    if (opt.enforce_iss && r.eps_norm > r.iss + opt.iss_tol) {
      std::ostringstream os;
      os << "framer width " << r.eps_norm << " exceeds the ISS bound " << r.iss << " at t=" << r.t;
      throw Error(ErrorCode::IssViolation, os.str());
    }

    const bool last = long(k) + 1 == N;
    if (opt.volumes && (long(k) % sc.mc_stride == 0 || last)) {
      r.poly_volume = sampler->volume(poly, r.box);
    }
    if (opt.containment_every_sample) check_containment(poly, r.box, r.t);
    for (std::size_t p = 0; p < projection_samples.size(); ++p) {
      if (projection_samples[p] != k || !opt.projections) continue;
      ProjectionRecord pr;
      pr.t = sc.projection_times[p];
      pr.sample = k;
      if (n >= 2) pr.polygon = project2d_outer(poly, sc.projection_dims, sc.n_dirs);
      std::tie(pr.mc_escaped, pr.mc_inside) = check_containment(poly, r.box, r.t);
      out.projections.push_back(std::move(pr));
    }
    out.samples.push_back(std::move(r));
  };

  if (model.domain == TimeDomain::DT) {
    out.truth = simulate_true(sc);
    FramerState s = s0;
    for (long k = 0; k < N; ++k) {
      const std::size_t i = std::size_t(k);
      record(i, s, out.truth.x[i], out.truth.y[i], out.truth.u[i]);
      if (k + 1 < N) s = step_embedding_dt(dyn, s, out.truth.y[i], out.truth.u[i]);
    }
    return out;
  }

  // CT: one RK4 over [x; z_lo; z_hi] so the observer sees the measurement of
  // the true stage state at every stage.
  auto f = [&](double t, const VectorXd& X) -> VectorXd {
    const VectorXd x = X.head(n);
    const VectorXd u = eval_u(sc, t);
    const VectorXd y = measure(model, x, u, eval_v(sc, t));
    auto [lo, hi] = embedding_rhs(dyn, X.segment(n, mz), X.tail(mz), y, u);
    VectorXd dX(n + 2 * mz);
    dX << model.A * x + model.B * u + model.W * eval_w(sc, t), lo, hi;
    return dX;
  };
  VectorXd X(n + 2 * mz);
  X << sc.x0_true, s0.z_lo, s0.z_hi;
  TrueTrajectory& tr = out.truth;
  for (long k = 0; k < N; ++k) {
    const double t = k * h;
    const VectorXd x = X.head(n);
    const VectorXd w = eval_w(sc, t), v = eval_v(sc, t), u = eval_u(sc, t);
    const VectorXd y = measure(model, x, u, v);
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.y.push_back(y);
    tr.w.push_back(w);
    tr.v.push_back(v);
    tr.u.push_back(u);
    FramerState s{X.segment(n, mz), X.tail(mz), t};
    check_order(s, 1e-9);
    record(std::size_t(k), s, x, y, u);
    if (k + 1 < N) X = rk4_step(f, t, X, h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace {

void put(std::ostream& os, const VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) os << ',' << format_double(v(i));
}

void header(std::ostream& os, const char* prefix, Index count) {
  for (Index i = 1; i <= count; ++i) os << ',' << prefix << i;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write \"" + p.string() + "\"");
  return f;
}

}  // namespace

std::vector<std::string> write_outputs(const RunArtifacts& a, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create \"" + dir + "\": " + ec.message());
  const fs::path root(dir);
  const Index m = a.transform.m(), n = a.transform.n();
  std::vector<std::string> files;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  {
    auto f = open_out(root / "framers.csv");
    f << "t";
    header(f, "z_lo_", m);
    header(f, "z_hi_", m);
    header(f, "x_lo_", n);
    header(f, "x_hi_", n);
    f << ",eps_inf_norm,iss_bound,box_volume,polytope_volume_mc\n";
    for (const auto& r : a.samples) {
      f << format_double(r.t);
      put(f, r.framer.z_lo);
      put(f, r.framer.z_hi);
      put(f, r.box.lo);
      put(f, r.box.hi);
      f << ',' << format_double(r.eps_norm) << ',' << format_double(r.iss) << ','
        << format_double(r.box_volume) << ','
        << format_double(r.poly_volume ? r.poly_volume->estimate : nan) << '\n';
    }
    files.push_back("framers.csv");
  }
  {
    auto f = open_out(root / "true.csv");
    const auto& tr = a.truth;
    const Index l = tr.size() ? tr.y[0].size() : 0;
    const Index nw = tr.size() ? tr.w[0].size() : 0;
    const Index nv = tr.size() ? tr.v[0].size() : 0;
    const Index nu = tr.size() ? tr.u[0].size() : 0;
    f << "t";
    header(f, "x_", n);
    header(f, "y_", l);
    header(f, "w_", nw);
    header(f, "v_", nv);
    header(f, "u_", nu);
    f << '\n';
    for (std::size_t k = 0; k < tr.size(); ++k) {
      f << format_double(tr.t[k]);
      put(f, tr.x[k]);
      put(f, tr.y[k]);
      put(f, tr.w[k]);
      put(f, tr.v[k]);
      put(f, tr.u[k]);
      f << '\n';
    }
    files.push_back("true.csv");
  }
  {
    auto f = open_out(root / "volumes.csv");
    f << "t,box_volume,polytope_volume_mc,polytope_volume_stderr\n";
    for (const auto& r : a.samples) {
      f << format_double(r.t) << ',' << format_double(r.box_volume) << ','
        << format_double(r.poly_volume ? r.poly_volume->estimate : nan) << ','
        << format_double(r.poly_volume ? r.poly_volume->std_error : nan) << '\n';
    }
    files.push_back("volumes.csv");
  }
  for (const auto& p : a.projections) {
    const std::string name = "projection_" + time_label(p.t) + ".csv";
    auto f = open_out(root / name);
    write_polygon_csv(f, p.polygon);
    files.push_back(name);
  }
  {
    auto f = open_out(root / "manifest.txt");
    f << "scenario = " << a.scenario_name << '\n';
    f << "scenario_hash = " << a.scenario_hash << '\n';
    f << "samples = " << a.samples.size() << '\n';
    f << "m = " << m << '\n';
    for (const auto& name : files) f << "file = " << name << '\n';
    files.push_back("manifest.txt");
  }
  return files;
}

}  // namespace polyobs
