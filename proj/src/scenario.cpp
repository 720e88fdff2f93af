#include "polyobs/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "polyobs/matrix_io.hpp"
#include "polyobs/set_geometry.hpp"

namespace polyobs {

using Eigen::Index;

double eval_signal(const SignalSpec& s, double t, double lo, double hi, double grid_step) {
  double v = 0;
  switch (s.kind) {
    case SignalKind::Constant:
      v = s.value;
      break;
    case SignalKind::Sinusoid:
      v = s.amplitude * std::sin(s.frequency * t + s.phase);
      break;
    case SignalKind::UniformRandom: {
      const double hold = s.hold > 0 ? s.hold : grid_step;
      const auto k = static_cast<std::int64_t>(std::floor(t / hold + 1e-9));
      v = lo + (hi - lo) * counter_uniform(s.seed, static_cast<std::uint64_t>(k));
      break;
    }
  }
  return std::min(hi, std::max(lo, v));
}

long Scenario::steps() const {
  if (!(horizon > 0)) return 0;
  return std::lround(horizon / step());
}

SynthesisOptions Scenario::synthesis_options() const {
  SynthesisOptions opt;
  opt.m_overrides = transform.m_overrides;
  opt.m_override_all = transform.m_override_all;
  opt.h_fraction = transform.h_fraction;
  opt.c_max = transform.c_max;
  return opt;
}

void Scenario::validate() const {
  auto fail = [&](const std::string& key, const std::string& msg) {
    std::ostringstream os;
    auto it = key_lines.find(key);
    if (it != key_lines.end()) os << "line " << it->second << " (" << key << "): ";
    else os << key << ": ";
    os << msg;
    throw Error(ErrorCode::Validation, os.str());
  };
  try {
    model.validate();
  } catch (const Error& e) {
    fail("model", e.what());
  }
  const Index n = model.n();
  if (L.rows() != n || L.cols() != model.l()) {
    std::ostringstream os;
    os << "L must be " << n << "x" << model.l() << ", got " << L.rows() << "x" << L.cols();
    fail("L", os.str());
  }
  if (x0_true.size() != n) fail("x0_true", "wrong length");
  if ((x0_true.array() < model.x0_lo.array()).any() || (x0_true.array() > model.x0_hi.array()).any()) {
    fail("x0_true", "true initial state lies outside the initial box");
  }
  if (!(horizon >= 0) || !std::isfinite(horizon)) fail("horizon", "must be a finite value >= 0");
  if (model.domain == TimeDomain::DT && horizon != std::floor(horizon)) {
    fail("horizon", "discrete-time horizon must be a whole number of steps");
  }
  if (model.domain == TimeDomain::CT && !(dt > 0 && std::isfinite(dt))) fail("dt", "must be positive");
  if (w_signals.size() != std::size_t(model.n_w())) fail("signal.w", "one signal per w channel");
  if (v_signals.size() != std::size_t(model.n_v())) fail("signal.v", "one signal per v channel");
  if (u_signals.size() != std::size_t(model.s())) fail("signal.u", "one signal per input channel");
  // Inputs carry no bounds to draw from.
  for (std::size_t k = 0; k < u_signals.size(); ++k) {
    if (u_signals[k].kind == SignalKind::UniformRandom) {
      fail("signal.u." + std::to_string(k + 1), "uniform_random needs a bounded channel");
    }
  }
  if (!(transform.h_fraction > 0 && transform.h_fraction < 1)) {
    fail("transform.h_fraction", "must lie in (0, 1)");
  }
  if (transform.c_max < 2) fail("transform.c_max", "must be at least 2");
  if (transform.m_override_all < 0) fail("transform.m_override", "must be >= 0");
  if (mc_samples < 1000) fail("mc.samples", "must be at least 1000");
  if (mc_stride < 1) fail("mc.stride", "must be at least 1");
  if (n_dirs < 8) fail("projection.n_dirs", "must be at least 8");
  const auto [pi, pj] = projection_dims;
  if (pi < 0 || pj < 0 || pi >= n || pj >= n || pi == pj) {
    if (n >= 2) fail("projection.dims", "must name two distinct state coordinates");
  }
  for (double t : projection_times) {
    if (!(t >= 0 && t <= horizon)) fail("projection.times", "times must lie within the horizon");
  }
}

bool same_scenario(const Scenario& a, const Scenario& b) {
  auto eq = [](const MatrixXd& x, const MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
  };
  const SystemModel& ma = a.model;
  const SystemModel& mb = b.model;
  return a.name == b.name && ma.domain == mb.domain && eq(ma.A, mb.A) && eq(ma.B, mb.B) &&
         eq(ma.W, mb.W) && eq(ma.C, mb.C) && eq(ma.D, mb.D) && eq(ma.V, mb.V) &&
         eq(ma.w_lo, mb.w_lo) && eq(ma.w_hi, mb.w_hi) && eq(ma.v_lo, mb.v_lo) &&
         eq(ma.v_hi, mb.v_hi) && eq(ma.x0_lo, mb.x0_lo) && eq(ma.x0_hi, mb.x0_hi) &&
         eq(a.L, b.L) && eq(a.x0_true, b.x0_true) && a.horizon == b.horizon && a.dt == b.dt &&
         a.w_signals == b.w_signals && a.v_signals == b.v_signals && a.u_signals == b.u_signals &&
         a.transform == b.transform && a.mc_samples == b.mc_samples && a.mc_seed == b.mc_seed &&
         a.mc_stride == b.mc_stride && a.n_dirs == b.n_dirs &&
         a.projection_dims == b.projection_dims && a.projection_times == b.projection_times;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

// Drops the "EParse: " prefix of a nested error message.
std::string strip_code(const std::string& what) {
  const auto colon = what.find(": ");
  return colon == std::string::npos ? what : what.substr(colon + 2);
}

class Parser {
 public:
  Parser(const std::string& text, std::string source) : is_(text), source_(std::move(source)) {}

  Scenario run() {
    Scenario sc;
    bool have_domain = false;
    std::map<std::string, MatrixXd> matrices;
    std::map<std::string, std::pair<SignalSpec, int>> signals;
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      if (t.rfind("matrix ", 0) == 0) {
        const std::string key = trim(t.substr(7));
        if (key != "model.A" && key != "model.B" && key != "model.W" && key != "model.C" &&
            key != "model.D" && key != "model.V" && key != "L") {
          fail("unknown matrix \"" + key + "\"");
        }
        record(sc, key);
        try {
          matrices[key] = read_matrix(is_, line_no_);
        } catch (const Error& e) {
          throw Error(ErrorCode::Parse, source_ + ": " + key + ": " + strip_code(e.what()));
        }
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) fail("expected \"key = value\" or \"matrix <key>\"");
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      record(sc, key);
      if (key == "name") {
        sc.name = value;
      } else if (key == "domain") {
        try {
          sc.model.domain = parse_time_domain(value);
        } catch (const Error&) {
          fail("domain must be CT or DT");
        }
        have_domain = true;
      } else if (key == "horizon") {
        sc.horizon = scalar(value);
      } else if (key == "dt") {
        sc.dt = scalar(value);
      } else if (key == "model.w_lo") {
        sc.model.w_lo = vector(value);
      } else if (key == "model.w_hi") {
        sc.model.w_hi = vector(value);
      } else if (key == "model.v_lo") {
        sc.model.v_lo = vector(value);
      } else if (key == "model.v_hi") {
        sc.model.v_hi = vector(value);
      } else if (key == "model.x0_lo") {
        sc.model.x0_lo = vector(value);
      } else if (key == "model.x0_hi") {
        sc.model.x0_hi = vector(value);
      } else if (key == "x0_true") {
        sc.x0_true = vector(value);
      } else if (key == "transform.m_override") {
        sc.transform.m_override_all = int(integer(value));
      } else if (key == "transform.m_overrides") {
        sc.transform.m_overrides.clear();
        for (double v : ints(value)) sc.transform.m_overrides.push_back(int(v));
      } else if (key == "transform.h_fraction") {
        sc.transform.h_fraction = scalar(value);
      } else if (key == "transform.c_max") {
        sc.transform.c_max = int(integer(value));
      } else if (key == "mc.samples") {
        sc.mc_samples = integer(value);
      } else if (key == "mc.seed") {
        sc.mc_seed = std::uint64_t(integer(value));
      } else if (key == "mc.stride") {
        sc.mc_stride = integer(value);
      } else if (key == "projection.n_dirs") {
        sc.n_dirs = int(integer(value));
      } else if (key == "projection.dims") {
        const auto d = ints(value);
        if (d.size() != 2) fail("projection.dims needs two 1-based coordinates");
        sc.projection_dims = {int(d[0]) - 1, int(d[1]) - 1};
      } else if (key == "projection.times") {
        const VectorXd v = vector(value);
        sc.projection_times.assign(v.data(), v.data() + v.size());
      } else if (key.rfind("signal.", 0) == 0) {
        signals[key] = {signal(value), line_no_};
      } else {
        fail("unknown key \"" + key + "\"");
      }
    }
    if (!have_domain) throw Error(ErrorCode::Parse, source_ + ": missing \"domain\"");
    if (!matrices.count("model.A")) throw Error(ErrorCode::Parse, source_ + ": missing matrix model.A");

    SystemModel& m = sc.model;
    m.A = matrices["model.A"];
    const Index n = m.A.rows();
    auto take = [&](const char* key, Index rows, Index cols) {
      auto it = matrices.find(key);
      return it != matrices.end() ? it->second : MatrixXd(rows, cols);
    };
    m.C = take("model.C", 0, n);
    m.B = take("model.B", n, 0);
    m.W = take("model.W", n, 0);
    m.D = take("model.D", m.C.rows(), m.B.cols());
    m.V = take("model.V", m.C.rows(), 0);
    sc.L = take("L", n, m.C.rows());
    // Signals: one per channel, defaulting to the channel midpoint.
    auto fill = [&](const char* group, Index count, const VectorXd& lo, const VectorXd& hi,
                    std::vector<SignalSpec>& out) {
      out.clear();
      for (Index k = 0; k < count; ++k) {
        const std::string key = std::string("signal.") + group + "." + std::to_string(k + 1);
        auto it = signals.find(key);
        if (it != signals.end()) {
          out.push_back(it->second.first);
          signals.erase(it);
        } else {
          const double mid = (lo.size() > k && hi.size() > k) ? 0.5 * (lo(k) + hi(k)) : 0.0;
          out.push_back(SignalSpec::constant(mid));
        }
      }
    };
    fill("w", m.n_w(), m.w_lo, m.w_hi, sc.w_signals);
    fill("v", m.n_v(), m.v_lo, m.v_hi, sc.v_signals);
    fill("u", m.s(), VectorXd(), VectorXd(), sc.u_signals);
    if (!signals.empty()) {
      line_no_ = signals.begin()->second.second;
      fail("signal key \"" + signals.begin()->first + "\" does not match a channel");
    }
    return sc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    std::ostringstream os;
    os << source_ << ":" << line_no_ << ": " << msg;
    throw Error(ErrorCode::Parse, os.str());
  }

  void record(Scenario& sc, const std::string& key) { sc.key_lines[key] = line_no_; }

  double scalar(const std::string& tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0' || !std::isfinite(v)) fail("invalid number \"" + tok + "\"");
    return v;
  }

  long integer(const std::string& tok) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (tok.empty() || *end != '\0') fail("invalid integer \"" + tok + "\"");
    return v;
  }

  VectorXd vector(const std::string& value) {
    std::istringstream ss(value);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(scalar(tok));
    return Eigen::Map<VectorXd>(out.data(), Index(out.size()));
  }

  std::vector<double> ints(const std::string& value) {
    std::istringstream ss(value);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(double(integer(tok)));
    return out;
  }

  SignalSpec signal(const std::string& value) {
    std::istringstream ss(value);
    std::string kind;
    ss >> kind;
    std::vector<std::string> args;
    std::string tok;
    while (ss >> tok) args.push_back(tok);
    if (kind == "constant" && args.size() == 1) return SignalSpec::constant(scalar(args[0]));
    if (kind == "sinusoid" && (args.size() == 2 || args.size() == 3)) {
      return SignalSpec::sinusoid(scalar(args[0]), scalar(args[1]),
                                  args.size() == 3 ? scalar(args[2]) : 0.0);
    }
    if (kind == "uniform_random" && (args.size() == 1 || args.size() == 2)) {
      const long seed = integer(args[0]);
      if (seed < 0) fail("seed must be nonnegative");
      return SignalSpec::uniform_random(std::uint64_t(seed), args.size() == 2 ? scalar(args[1]) : 0.0);
    }
    fail("signal must be \"constant v\", \"sinusoid amplitude frequency [phase]\" or "
         "\"uniform_random seed [hold]\"");
  }

  std::istringstream is_;
  std::string source_;
  int line_no_ = 0;
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  Scenario sc = Parser(text, source).run();
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string join(const VectorXd& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v(i));
  }
  return out;
}

std::string render(const SignalSpec& s) {
  std::ostringstream os;
  switch (s.kind) {
    case SignalKind::Constant:
      os << "constant " << format_double(s.value);
      break;
    case SignalKind::Sinusoid:
      os << "sinusoid " << format_double(s.amplitude) << ' ' << format_double(s.frequency) << ' '
         << format_double(s.phase);
      break;
    case SignalKind::UniformRandom:
      os << "uniform_random " << s.seed << ' ' << format_double(s.hold);
      break;
  }
  return os.str();
}

}  // namespace

std::string serialize_scenario(const Scenario& sc) {
  std::ostringstream os;
  const SystemModel& m = sc.model;
  os << "name = " << sc.name << '\n';
  os << "domain = " << to_string(m.domain) << '\n';
  os << "horizon = " << format_double(sc.horizon) << '\n';
  os << "dt = " << format_double(sc.dt) << '\n';
  const std::pair<const char*, const MatrixXd*> mats[] = {
      {"model.A", &m.A}, {"model.B", &m.B}, {"model.W", &m.W}, {"model.C", &m.C},
      {"model.D", &m.D}, {"model.V", &m.V}, {"L", &sc.L}};
  for (const auto& [key, M] : mats) {
    os << "matrix " << key << '\n';
    write_matrix(os, *M);
  }
  os << "model.w_lo = " << join(m.w_lo) << '\n';
  os << "model.w_hi = " << join(m.w_hi) << '\n';
  os << "model.v_lo = " << join(m.v_lo) << '\n';
  os << "model.v_hi = " << join(m.v_hi) << '\n';
  os << "model.x0_lo = " << join(m.x0_lo) << '\n';
  os << "model.x0_hi = " << join(m.x0_hi) << '\n';
  os << "x0_true = " << join(sc.x0_true) << '\n';
  const std::pair<const char*, const std::vector<SignalSpec>*> groups[] = {
      {"w", &sc.w_signals}, {"v", &sc.v_signals}, {"u", &sc.u_signals}};
  for (const auto& [group, list] : groups) {
    for (std::size_t k = 0; k < list->size(); ++k) {
      os << "signal." << group << '.' << (k + 1) << " = " << render((*list)[k]) << '\n';
    }
  }
  os << "transform.m_override = " << sc.transform.m_override_all << '\n';
  os << "transform.m_overrides =";
  for (int v : sc.transform.m_overrides) os << ' ' << v;
  os << '\n';
  os << "transform.h_fraction = " << format_double(sc.transform.h_fraction) << '\n';
  os << "transform.c_max = " << sc.transform.c_max << '\n';
  os << "mc.samples = " << sc.mc_samples << '\n';
  os << "mc.seed = " << sc.mc_seed << '\n';
  os << "mc.stride = " << sc.mc_stride << '\n';
  os << "projection.n_dirs = " << sc.n_dirs << '\n';
  os << "projection.dims = " << sc.projection_dims.first + 1 << ' ' << sc.projection_dims.second + 1
     << '\n';
  os << "projection.times =";
  for (double t : sc.projection_times) os << ' ' << format_double(t);
  os << '\n';
  return os.str();
}

std::string scenario_hash(const Scenario& sc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_scenario(sc)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace polyobs
