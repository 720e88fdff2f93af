#ifndef POLYOBS_TRANSFORM_SYNTH_HPP
#define POLYOBS_TRANSFORM_SYNTH_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyobs/matrix_core.hpp"

namespace polyobs {

enum class TimeDomain { CT, DT };

std::string_view to_string(TimeDomain d);
TimeDomain parse_time_domain(std::string_view s);

struct RealBlockPlan {
  double lambda = 0;
  int size = 1;
  double h = 0;
};

struct ComplexBlockPlan {
  double sigma = 0;
  double omega = 0;
  int size = 1;
  int m = 2;
  double h = 0;
  double xi = 0;     // CT diagonal of Q_m
  double psi = 0;    // CT super-diagonal of Q_m
  VectorXd zeta;     // DT first row of Q_m
  double gamma = 0;  // DT ||zeta||_1
};

struct BlockPlan {
  std::vector<RealBlockPlan> real;
  std::vector<ComplexBlockPlan> complex;

  /// Lifted dimension: sum of real chain lengths plus m_i times complex chain
  /// lengths.
  int lifted_dim() const;
};

/// P (m x n, full column rank) and Q (m x m) with P A_cl = Q P, and
/// mu_inf(Q) < 0 for CT or ||Q||_inf < 1 for DT.
struct TransformPair {
  MatrixXd P;
  MatrixXd Q;
  BlockPlan plan;
  TimeDomain domain = TimeDomain::CT;
  double residual = 0;

  Eigen::Index m() const { return P.rows(); }
  Eigen::Index n() const { return P.cols(); }
};

struct SynthesisOptions {
  /// Per complex pair (in plan order); 0 keeps the minimal size. Entries
  /// beyond the pair count are ignored.
  std::vector<int> m_overrides;
  /// Applied to every complex pair when positive; per-pair entries win.
  int m_override_all = 0;
  double h_fraction = 0.5;
  int c_max = 256;
  double strict_margin = 1e-9;
  double transform_rel = 1e-7;
  /// Bypasses the eigensolver, allowing Jordan chains of length > 1.
  std::optional<RealJordanForm<double>> jordan;
  EigenTolerances eig;
};

/// Smallest c in [2, c_max] with sigma/omega < (cos(pi/c) - 1)/sin(pi/c).
int min_block_size_ct(double sigma, double omega, int c_max = 256);

struct DtBlockSize {
  int m = 2;
  VectorXd zeta;
  double gamma = 0;
};

/// Solves min ||zeta||_1 s.t. P_m^T zeta = (sigma, omega) at a fixed m.
DtBlockSize solve_block_lp_dt(double sigma, double omega, int m);

/// Smallest c in [2, c_max] whose block LP reaches gamma < 1 - strict_margin.
DtBlockSize min_block_size_dt(double sigma, double omega, int c_max = 256,
                              double strict_margin = 1e-9);

/// m x 2 matrix whose row j is (cos(j pi/m), sin(j pi/m)).
MatrixXd build_Pm(int m);

/// Cyclic CT block: xi on the diagonal, psi on the super-diagonal and -psi in
/// the bottom-left corner.
MatrixXd build_Qm_ct(double sigma, double omega, int m);

/// Skew-circulant DT block whose first row is zeta.
MatrixXd build_Qm_dt(const VectorXd& zeta);

/// Fills h for every block at `fraction` of its admissible interval.
BlockPlan choose_h(BlockPlan plan, TimeDomain domain, double fraction);

/// True when the pair needs no lifting (m_i = 2): sigma < -omega for CT and
/// |sigma| + |omega| < 1 for DT.
bool square_case(double sigma, double omega, TimeDomain domain);

TransformPair synthesize_transform(const MatrixXd& A_cl, TimeDomain domain,
                                   const SynthesisOptions& options = {});

/// Text form: key = value header lines, block metadata, then the P and Q
/// matrices in the plain matrix format.
void write_transform(std::ostream& os, const TransformPair& tp);
TransformPair read_transform(std::istream& is);

}  // namespace polyobs

#endif  // POLYOBS_TRANSFORM_SYNTH_HPP
