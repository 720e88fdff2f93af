#include "polyobs/transform_synth.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "polyobs/lp_solver.hpp"
#include "polyobs/matrix_io.hpp"

namespace polyobs {

using Eigen::Index;

std::string_view to_string(TimeDomain d) { return d == TimeDomain::CT ? "CT" : "DT"; }

TimeDomain parse_time_domain(std::string_view s) {
  if (s == "CT" || s == "ct") return TimeDomain::CT;
  if (s == "DT" || s == "dt") return TimeDomain::DT;
  throw Error(ErrorCode::Parse, "unknown time domain \"" + std::string(s) + "\"");
}

int BlockPlan::lifted_dim() const {
  int m = 0;
  for (const auto& b : real) m += b.size;
  for (const auto& b : complex) m += b.m * b.size;
  return m;
}

int min_block_size_ct(double sigma, double omega, int c_max) {
  if (!(omega > 0)) throw Error(ErrorCode::Validation, "min_block_size_ct: omega must be positive");
  if (!(sigma < 0)) {
    throw Error(ErrorCode::NotStable, "min_block_size_ct: complex pair is not Hurwitz");
  }
  const double ratio = sigma / omega;
  for (int c = 2; c <= c_max; ++c) {
    // (cos(x) - 1) / sin(x) = -tan(x/2); the relative margin keeps the
    // inequality strict under rounding.
    const double rhs = -std::tan(std::numbers::pi / (2.0 * c));
    if (ratio < rhs - 1e-12 * (1.0 + std::abs(rhs))) return c;
  }
  std::ostringstream os;
  os << "min_block_size_ct: no c <= " << c_max << " for sigma=" << sigma << " omega=" << omega;
  throw Error(ErrorCode::CMaxExceeded, os.str());
}

MatrixXd build_Pm(int m) {
  if (m < 2) throw Error(ErrorCode::BadSize, "build_Pm: m must be at least 2");
  MatrixXd P(m, 2);
  for (int j = 0; j < m; ++j) {
    const double a = j * std::numbers::pi / m;
    P(j, 0) = std::cos(a);
    P(j, 1) = std::sin(a);
  }
  // Exact values at the quarter turn keep P_2 = I.
  if (m % 2 == 0) P.row(m / 2) << 0.0, 1.0;
  return P;
}

MatrixXd build_Qm_ct(double sigma, double omega, int m) {
  if (m < 2) throw Error(ErrorCode::BadSize, "build_Qm_ct: m must be at least 2");
  const double a = std::numbers::pi / m;
  const double cot = m == 2 ? 0.0 : std::cos(a) / std::sin(a);
  const double csc = m == 2 ? 1.0 : 1.0 / std::sin(a);
  const double xi = sigma - omega * cot;
  const double psi = omega * csc;
  MatrixXd Q = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    Q(i, i) = xi;
    if (i + 1 < m) Q(i, i + 1) = psi;
  }
  Q(m - 1, 0) = -psi;
  return Q;
}

MatrixXd build_Qm_dt(const VectorXd& zeta) {
  const Index m = zeta.size();
  if (m < 2) throw Error(ErrorCode::BadSize, "build_Qm_dt: m must be at least 2");
  MatrixXd Q(m, m);
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < m; ++c) {
      Q(r, c) = c >= r ? zeta(c - r) : -zeta(m + c - r);
    }
  }
  return Q;
}

DtBlockSize solve_block_lp_dt(double sigma, double omega, int m) {
  const MatrixXd Pm = build_Pm(m);
  // Variables: [zeta (m), eta (m)], both free.
  LpProblem lp;
  lp.c = VectorXd::Zero(2 * m);
  lp.c.tail(m).setOnes();
  lp.eq_A = MatrixXd::Zero(2, 2 * m);
  lp.eq_A.leftCols(m) = Pm.transpose();
  lp.eq_b = Eigen::Vector2d(sigma, omega);
  lp.ineq_A = MatrixXd::Zero(2 * m, 2 * m);
  lp.ineq_A.topLeftCorner(m, m) = MatrixXd::Identity(m, m);
  lp.ineq_A.topRightCorner(m, m) = -MatrixXd::Identity(m, m);
  lp.ineq_A.bottomLeftCorner(m, m) = -MatrixXd::Identity(m, m);
  lp.ineq_A.bottomRightCorner(m, m) = -MatrixXd::Identity(m, m);
  lp.ineq_b = VectorXd::Zero(2 * m);
  const LpSolution sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal) {
    throw Error(ErrorCode::NoConvergence, "solve_block_lp_dt: block LP not solved to optimality");
  }
  DtBlockSize out;
  out.m = m;
  out.zeta = sol.x.head(m);
  out.gamma = out.zeta.lpNorm<1>();
  return out;
}

DtBlockSize min_block_size_dt(double sigma, double omega, int c_max, double strict_margin) {
  if (!(omega > 0)) throw Error(ErrorCode::Validation, "min_block_size_dt: omega must be positive");
  if (!(std::hypot(sigma, omega) < 1)) {
    throw Error(ErrorCode::NotStable, "min_block_size_dt: complex pair is not Schur");
  }
  for (int c = 2; c <= c_max; ++c) {
    DtBlockSize r = solve_block_lp_dt(sigma, omega, c);
    if (r.gamma < 1 - strict_margin) return r;
  }
  std::ostringstream os;
  os << "min_block_size_dt: no c <= " << c_max << " for sigma=" << sigma << " omega=" << omega;
  throw Error(ErrorCode::CMaxExceeded, os.str());
}

bool square_case(double sigma, double omega, TimeDomain domain) {
  if (domain == TimeDomain::CT) return sigma < -omega;
  return std::abs(sigma) + std::abs(omega) < 1;
}

BlockPlan choose_h(BlockPlan plan, TimeDomain domain, double fraction) {
  if (!(fraction > 0 && fraction < 1)) {
    throw Error(ErrorCode::Validation, "choose_h: fraction must lie in (0, 1)");
  }
  for (auto& b : plan.real) {
    const double room = domain == TimeDomain::CT ? -b.lambda : 1 - std::abs(b.lambda);
    if (!(room > 0)) throw Error(ErrorCode::NotStable, "choose_h: real eigenvalue is not stable");
    b.h = fraction * room;
  }
  for (auto& b : plan.complex) {
    const double room = domain == TimeDomain::CT ? -(b.xi + b.psi) : 1 - b.gamma;
    if (!(room > 0)) throw Error(ErrorCode::NotStable, "choose_h: complex block is not contractive");
    b.h = fraction * room;
  }
  return plan;
}

namespace {

void require_stable(const RealJordanForm<double>& jf, TimeDomain domain) {
  for (const auto& b : jf.real_blocks) {
    const bool ok = domain == TimeDomain::CT ? b.lambda < 0 : std::abs(b.lambda) < 1;
    if (!ok) {
      std::ostringstream os;
      os << "A_cl has unstable eigenvalue " << b.lambda << " (" << to_string(domain) << ")";
      throw Error(ErrorCode::NotStable, os.str());
    }
  }
  for (const auto& b : jf.complex_blocks) {
    const bool ok = domain == TimeDomain::CT ? b.sigma < 0 : std::hypot(b.sigma, b.omega) < 1;
    if (!ok) {
      std::ostringstream os;
      os << "A_cl has unstable eigenvalue pair " << b.sigma << " +/- " << b.omega << "i ("
         << to_string(domain) << ")";
      throw Error(ErrorCode::NotStable, os.str());
    }
  }
}

int requested_m(const SynthesisOptions& opt, std::size_t pair) {
  if (pair < opt.m_overrides.size() && opt.m_overrides[pair] > 0) return opt.m_overrides[pair];
  return opt.m_override_all;
}

ComplexBlockPlan plan_complex(const ComplexJordanBlock<double>& b, TimeDomain domain, int override_m,
                              const SynthesisOptions& opt) {
  ComplexBlockPlan p;
  p.sigma = b.sigma;
  p.omega = b.omega;
  p.size = b.size;
  if (domain == TimeDomain::CT) {
    const int minimal = min_block_size_ct(b.sigma, b.omega, opt.c_max);
    if (override_m > 0 && override_m < minimal) {
      std::ostringstream os;
      os << "m override " << override_m << " is below the minimal block size " << minimal;
      throw Error(ErrorCode::Validation, os.str());
    }
    p.m = override_m > 0 ? override_m : minimal;
    const MatrixXd Qm = build_Qm_ct(b.sigma, b.omega, p.m);
    p.xi = Qm(0, 0);
    p.psi = Qm(0, 1);
  } else {
    DtBlockSize r = min_block_size_dt(b.sigma, b.omega, opt.c_max, opt.strict_margin);
    if (override_m > 0) {
      if (override_m < r.m) {
        std::ostringstream os;
        os << "m override " << override_m << " is below the minimal block size " << r.m;
        throw Error(ErrorCode::Validation, os.str());
      }
      r = solve_block_lp_dt(b.sigma, b.omega, override_m);
      if (!(r.gamma < 1 - opt.strict_margin)) {
        std::ostringstream os;
        os << "m override " << override_m << " gives gamma = " << r.gamma << " >= 1";
        throw Error(ErrorCode::Validation, os.str());
      }
    }
    p.m = r.m;
    p.zeta = r.zeta;
    p.gamma = r.gamma;
  }
  return p;
}

}  // namespace

TransformPair synthesize_transform(const MatrixXd& A_cl, TimeDomain domain,
                                   const SynthesisOptions& opt) {
  if (A_cl.rows() != A_cl.cols()) {
    throw Error(ErrorCode::NotSquare, "synthesize_transform: A_cl must be square");
  }
  const Index n = A_cl.rows();
  const RealJordanForm<double> jf = opt.jordan ? *opt.jordan : real_jordan(A_cl, opt.eig);
  if (jf.dimension() != n || jf.T.rows() != n || jf.T.cols() != n) {
    throw Error(ErrorCode::BadSize, "synthesize_transform: Jordan form dimension mismatch");
  }
  const double a_norm = std::max(norm_inf(A_cl), 1e-300);
  if (opt.jordan && !(jf.residual(A_cl) <= opt.eig.jordan_rel * a_norm)) {
    throw Error(ErrorCode::JordanDefective,
                "synthesize_transform: supplied Jordan form does not reproduce A_cl");
  }
  require_stable(jf, domain);

  BlockPlan plan;
  for (const auto& b : jf.real_blocks) plan.real.push_back({b.lambda, b.size, 0.0});
  for (std::size_t i = 0; i < jf.complex_blocks.size(); ++i) {
    plan.complex.push_back(plan_complex(jf.complex_blocks[i], domain, requested_m(opt, i), opt));
  }
  plan = choose_h(std::move(plan), domain, opt.h_fraction);

  const Index m = plan.lifted_dim();
  MatrixXd blockP = MatrixXd::Zero(m, n);
  MatrixXd Q = MatrixXd::Zero(m, m);
  Index row = 0, col = 0;
  for (const auto& b : plan.real) {
    for (int k = 0; k < b.size; ++k) {
      blockP(row + k, col + k) = std::pow(b.h, -k);
      Q(row + k, row + k) = b.lambda;
      if (k + 1 < b.size) Q(row + k, row + k + 1) = b.h;
    }
    row += b.size;
    col += b.size;
  }
  for (const auto& b : plan.complex) {
    const MatrixXd Pm = build_Pm(b.m);
    const MatrixXd Qm =
        domain == TimeDomain::CT ? build_Qm_ct(b.sigma, b.omega, b.m) : build_Qm_dt(b.zeta);
    for (int k = 0; k < b.size; ++k) {
      blockP.block(row + k * b.m, col + 2 * k, b.m, 2) = std::pow(b.h, -k) * Pm;
      Q.block(row + k * b.m, row + k * b.m, b.m, b.m) = Qm;
      if (k + 1 < b.size) {
        Q.block(row + k * b.m, row + (k + 1) * b.m, b.m, b.m) = b.h * MatrixXd::Identity(b.m, b.m);
      }
    }
    row += Index(b.m) * b.size;
    col += 2 * b.size;
  }

  TransformPair tp;
  tp.P = blockP * jf.T.partialPivLu().inverse();
  tp.Q = std::move(Q);
  tp.plan = std::move(plan);
  tp.domain = domain;
  tp.residual = norm_inf((tp.P * A_cl - tp.Q * tp.P).eval());

  if (!(tp.residual <= opt.transform_rel * a_norm)) {
    std::ostringstream os;
    os << "synthesize_transform: residual " << tp.residual << " above "
       << opt.transform_rel * a_norm;
    throw Error(ErrorCode::ResidualTooLarge, os.str());
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(tp.P);
  qr.setThreshold(1e-10);
  if (qr.rank() != n) throw Error(ErrorCode::RankDeficient, "synthesize_transform: P is rank deficient");
  const bool contractive =
      domain == TimeDomain::CT ? mu_inf(tp.Q) < 0 : norm_inf(tp.Q) < 1;
  if (!contractive) throw Error(ErrorCode::NotStable, "synthesize_transform: Q is not contractive");
  return tp;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void write_transform(std::ostream& os, const TransformPair& tp) {
  os << "# polyobs transform\n";
  os << "domain = " << to_string(tp.domain) << '\n';
  os << "n = " << tp.n() << '\n';
  os << "m = " << tp.m() << '\n';
  os << "residual = " << format_double(tp.residual) << '\n';
  for (const auto& b : tp.plan.real) {
    os << "real = " << format_double(b.lambda) << ' ' << b.size << ' ' << format_double(b.h) << '\n';
  }
  for (const auto& b : tp.plan.complex) {
    os << "complex = " << format_double(b.sigma) << ' ' << format_double(b.omega) << ' ' << b.size
       << ' ' << b.m << ' ' << format_double(b.h) << ' ' << format_double(b.xi) << ' '
       << format_double(b.psi) << ' ' << format_double(b.gamma) << ' ' << b.zeta.size();
    for (Index i = 0; i < b.zeta.size(); ++i) os << ' ' << format_double(b.zeta(i));
    os << '\n';
  }
  os << "P\n";
  write_matrix(os, tp.P);
  os << "Q\n";
  write_matrix(os, tp.Q);
}

TransformPair read_transform(std::istream& is) {
  TransformPair tp;
  std::string line;
  int line_no = 0;
  bool have_P = false, have_Q = false;
  long n = -1, m = -1;
  auto fail = [&](const std::string& msg) -> void {
    std::ostringstream os;
    os << "transform line " << line_no << ": " << msg;
    throw Error(ErrorCode::Parse, os.str());
  };
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string trimmed = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    if (trimmed == "P") {
      tp.P = read_matrix(is, line_no);
      have_P = true;
      continue;
    }
    if (trimmed == "Q") {
      tp.Q = read_matrix(is, line_no);
      have_Q = true;
      continue;
    }
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trimmed.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    std::istringstream vs(trimmed.substr(eq + 1));
    if (key == "domain") {
      std::string d;
      vs >> d;
      tp.domain = parse_time_domain(d);
    } else if (key == "n") {
      if (!(vs >> n)) fail("bad n");
    } else if (key == "m") {
      if (!(vs >> m)) fail("bad m");
    } else if (key == "residual") {
      if (!(vs >> tp.residual)) fail("bad residual");
    } else if (key == "real") {
      RealBlockPlan b;
      if (!(vs >> b.lambda >> b.size >> b.h)) fail("bad real block");
      tp.plan.real.push_back(b);
    } else if (key == "complex") {
      ComplexBlockPlan b;
      long nz = 0;
      if (!(vs >> b.sigma >> b.omega >> b.size >> b.m >> b.h >> b.xi >> b.psi >> b.gamma >> nz) ||
          nz < 0) {
        fail("bad complex block");
      }
      b.zeta.resize(nz);
      for (long i = 0; i < nz; ++i) {
        if (!(vs >> b.zeta(i))) fail("bad zeta entry");
      }
      tp.plan.complex.push_back(b);
    } else {
      fail("unknown key \"" + key + "\"");
    }
  }
  if (!have_P || !have_Q) throw Error(ErrorCode::Parse, "transform: missing P or Q matrix");
  if (tp.P.rows() != tp.Q.rows() || tp.Q.rows() != tp.Q.cols() || (n >= 0 && tp.P.cols() != n) ||
      (m >= 0 && tp.P.rows() != m) || tp.plan.lifted_dim() != tp.P.rows()) {
    throw Error(ErrorCode::Validation, "transform: inconsistent dimensions");
  }
  return tp;
}

}  // namespace polyobs
