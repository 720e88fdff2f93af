#ifndef POLYOBS_MATRIX_CORE_HPP
#define POLYOBS_MATRIX_CORE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <vector>

#include "polyobs/error.hpp"

namespace polyobs {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& M, const char* who) {
  if (M.rows() != M.cols()) {
    std::ostringstream os;
    os << who << ": expected a square matrix, got " << M.rows() << "x" << M.cols();
    throw Error(ErrorCode::NotSquare, os.str());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sign and diagonal splits
// ---------------------------------------------------------------------------

/// Elementwise max(M, 0).
template <typename Derived>
typename Derived::PlainObject pos_part(const Eigen::MatrixBase<Derived>& M) {
  return M.cwiseMax(typename Derived::Scalar(0));
}

/// Elementwise max(-M, 0), i.e. pos_part(M) - M.
template <typename Derived>
typename Derived::PlainObject neg_part(const Eigen::MatrixBase<Derived>& M) {
  return (-M).cwiseMax(typename Derived::Scalar(0));
}

template <typename Scalar>
struct SignSplit {
  Matrix<Scalar> plus;
  Matrix<Scalar> minus;
};

/// Decomposes M = plus - minus with both parts nonnegative and
/// plus + minus = |M|.
template <typename Derived>
SignSplit<typename Derived::Scalar> split_pos_neg(const Eigen::MatrixBase<Derived>& M) {
  return {pos_part(M), neg_part(M)};
}

template <typename Scalar>
struct DiagSplit {
  Matrix<Scalar> diag;
  Matrix<Scalar> offdiag;
};

template <typename Derived>
DiagSplit<typename Derived::Scalar> split_diag_offdiag(const Eigen::MatrixBase<Derived>& M) {
  detail::require_square(M, "split_diag_offdiag");
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> d = M.diagonal().asDiagonal();
  Matrix<Scalar> nd = M;
  nd.diagonal().setZero();
  return {std::move(d), std::move(nd)};
}

/// Keeps the diagonal and replaces off-diagonal entries with their absolute
/// values. The result is Metzler.
template <typename Derived>
typename Derived::PlainObject metzlerize(const Eigen::MatrixBase<Derived>& M) {
  detail::require_square(M, "metzlerize");
  typename Derived::PlainObject out = M.cwiseAbs();
  out.diagonal() = M.diagonal();
  return out;
}

// ---------------------------------------------------------------------------
// Infinity norms
// ---------------------------------------------------------------------------

/// Logarithmic norm induced by the vector infinity norm:
/// max_i (M_ii + sum_{j != i} |M_ij|).
template <typename Derived>
typename Derived::Scalar mu_inf(const Eigen::MatrixBase<Derived>& M) {
  detail::require_square(M, "mu_inf");
  using Scalar = typename Derived::Scalar;
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Scalar row = M(i, i);
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j != i) row += std::abs(M(i, j));
    }
    best = std::max(best, row);
  }
  return best;
}

/// Max absolute row sum. Returns 0 for matrices without rows or columns.
template <typename Derived>
typename Derived::Scalar norm_inf(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  Scalar best = 0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Scalar row = 0;
    for (Eigen::Index j = 0; j < M.cols(); ++j) row += std::abs(M(i, j));
    best = std::max(best, row);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Spectra and real Jordan forms
// ---------------------------------------------------------------------------

struct EigenTolerances {
  double eig_tol = 1e-9;      // eigenpair residual, relative to ||A||_inf
  double im_rel = 1e-9;       // imaginary parts below im_rel*||A||_inf are snapped to 0
  double cluster_rel = 1e-7;  // eigenvalues closer than this (relative) share a cluster
  double null_rel = 1e-6;     // eigenspace singular-value threshold within a cluster
  double jordan_rel = 1e-7;   // ||T J T^-1 - A||_inf bound, relative to ||A||_inf
  double cond_max = 1e8;
  int sweeps_per_row = 100;   // QR iteration cap is sweeps_per_row * n
};

template <typename Scalar>
struct RealEigenvalue {
  Scalar value;
  int multiplicity;
};

template <typename Scalar>
struct ComplexPair {
  Scalar sigma;
  Scalar omega;  // > 0; the conjugate is implicit
  int multiplicity;
};

template <typename Scalar>
struct Spectrum {
  std::vector<RealEigenvalue<Scalar>> real_eigs;
  std::vector<ComplexPair<Scalar>> complex_pairs;

  int dimension() const {
    int n = 0;
    for (const auto& r : real_eigs) n += r.multiplicity;
    for (const auto& c : complex_pairs) n += 2 * c.multiplicity;
    return n;
  }

  Scalar max_real_part() const {
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (const auto& r : real_eigs) best = std::max(best, r.value);
    for (const auto& c : complex_pairs) best = std::max(best, c.sigma);
    return best;
  }

  Scalar spectral_radius() const {
    Scalar best = 0;
    for (const auto& r : real_eigs) best = std::max(best, std::abs(r.value));
    for (const auto& c : complex_pairs) best = std::max(best, std::hypot(c.sigma, c.omega));
    return best;
  }
};

template <typename Scalar>
struct RealJordanBlock {
  Scalar lambda;
  int size;
};

template <typename Scalar>
struct ComplexJordanBlock {
  Scalar sigma;
  Scalar omega;
  int size;
};

/// T^{-1} A T = J, with the real chains first and the complex chains after,
/// each in the order listed.
template <typename Scalar>
struct RealJordanForm {
  Matrix<Scalar> T;
  std::vector<RealJordanBlock<Scalar>> real_blocks;
  std::vector<ComplexJordanBlock<Scalar>> complex_blocks;

  int dimension() const {
    int n = 0;
    for (const auto& b : real_blocks) n += b.size;
    for (const auto& b : complex_blocks) n += 2 * b.size;
    return n;
  }

  Matrix<Scalar> jordan_matrix() const {
    const int n = dimension();
    Matrix<Scalar> J = Matrix<Scalar>::Zero(n, n);
    int at = 0;
    for (const auto& b : real_blocks) {
      for (int k = 0; k < b.size; ++k) {
        J(at + k, at + k) = b.lambda;
        if (k + 1 < b.size) J(at + k, at + k + 1) = 1;
      }
      at += b.size;
    }
    for (const auto& b : complex_blocks) {
      for (int k = 0; k < b.size; ++k) {
        const int r = at + 2 * k;
        J(r, r) = b.sigma;
        J(r, r + 1) = b.omega;
        J(r + 1, r) = -b.omega;
        J(r + 1, r + 1) = b.sigma;
        if (k + 1 < b.size) {
          J(r, r + 2) = 1;
          J(r + 1, r + 3) = 1;
        }
      }
      at += 2 * b.size;
    }
    return J;
  }

  /// ||T J T^{-1} - A||_inf.
  template <typename Derived>
  Scalar residual(const Eigen::MatrixBase<Derived>& A) const {
    const Matrix<Scalar> Tinv = T.partialPivLu().inverse();
    return norm_inf((T * jordan_matrix() * Tinv - A).eval());
  }
};

namespace detail {

template <typename Scalar>
struct EigenDecomposition {
  Vector<std::complex<Scalar>> values;
  Matrix<std::complex<Scalar>> vectors;
  Scalar norm;
};

template <typename Derived>
EigenDecomposition<typename Derived::Scalar> eigen_decompose(const Eigen::MatrixBase<Derived>& A,
                                                             const EigenTolerances& tol) {
  using Scalar = typename Derived::Scalar;
  require_square(A, "eig_real");
  if (!A.allFinite()) throw Error(ErrorCode::Validation, "eig_real: non-finite entries");
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<Matrix<Scalar>> solver;
  solver.setMaxIterations(tol.sweeps_per_row * n);
  solver.compute(A.eval(), true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "eig_real: QR iteration did not converge");
  }
  EigenDecomposition<Scalar> out{solver.eigenvalues(), solver.eigenvectors(), norm_inf(A)};
  const Scalar scale = std::max(out.norm, std::numeric_limits<Scalar>::min());
  const Matrix<std::complex<Scalar>> Ac = A.template cast<std::complex<Scalar>>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto v = out.vectors.col(k);
    const Scalar res = (Ac * v - out.values(k) * v).cwiseAbs().maxCoeff();
    const Scalar vnorm = v.cwiseAbs().maxCoeff();
    if (!(res <= tol.eig_tol * scale * vnorm)) {
      throw Error(ErrorCode::NoConvergence, "eig_real: eigenpair residual above tolerance");
    }
  }
  return out;
}

// Index groups of eigenvalues that are numerically equal.
template <typename Scalar>
struct Cluster {
  std::complex<Scalar> center;
  std::vector<Eigen::Index> members;
};

template <typename Scalar>
void clusterize(const EigenDecomposition<Scalar>& dec, const EigenTolerances& tol,
                std::vector<Cluster<Scalar>>& reals, std::vector<Cluster<Scalar>>& complexes) {
  const Scalar scale = std::max(dec.norm, Scalar(1e-300));
  const Scalar im_tol = tol.im_rel * scale;
  const Scalar cl_tol = tol.cluster_rel * scale;
  std::vector<std::pair<Scalar, Eigen::Index>> re;
  std::vector<std::pair<std::pair<Scalar, Scalar>, Eigen::Index>> cx;
  for (Eigen::Index k = 0; k < dec.values.size(); ++k) {
    const auto lam = dec.values(k);
    if (std::abs(lam.imag()) <= im_tol) {
      re.push_back({lam.real(), k});
    } else if (lam.imag() > 0) {
      cx.push_back({{lam.real(), lam.imag()}, k});
    }
  }
  std::sort(re.begin(), re.end());
  std::sort(cx.begin(), cx.end());
  for (const auto& [value, idx] : re) {
    if (!reals.empty() && value - reals.back().center.real() <= cl_tol) {
      auto& c = reals.back();
      c.members.push_back(idx);
    } else {
      reals.push_back({std::complex<Scalar>(value, 0), {idx}});
    }
  }
  for (const auto& [key, idx] : cx) {
    const std::complex<Scalar> lam(key.first, key.second);
    bool merged = false;
    for (auto& c : complexes) {
      if (std::abs(c.center - lam) <= cl_tol) {
        c.members.push_back(idx);
        merged = true;
        break;
      }
    }
    if (!merged) complexes.push_back({lam, {idx}});
  }
  // Cluster centers are member means.
  for (auto* group : {&reals, &complexes}) {
    for (auto& c : *group) {
      std::complex<Scalar> sum(0, 0);
      for (auto idx : c.members) sum += dec.values(idx);
      c.center = sum / Scalar(c.members.size());
      if (group == &reals) c.center.imag(0);
    }
  }
}

// Eigenvectors are scaled so their last non-negligible component is exactly 1.
// This fixes sign, phase and length deterministically.
template <typename Scalar, typename Vec>
Eigen::Index pivot_index(const Vec& v) {
  const Scalar cut = Scalar(1e-6) * v.cwiseAbs().maxCoeff();
  Eigen::Index k = v.size() - 1;
  while (k > 0 && !(std::abs(v(k)) > cut)) --k;
  return k;
}

template <typename Scalar>
Vector<Scalar> canonical_real(Vector<Scalar> v) {
  const Eigen::Index k = pivot_index<Scalar>(v);
  v /= v(k);
  v(k) = 1;
  return v;
}

template <typename Scalar>
Vector<std::complex<Scalar>> canonical_complex(Vector<std::complex<Scalar>> v) {
  const Eigen::Index k = pivot_index<Scalar>(v);
  v /= v(k);
  v(k) = std::complex<Scalar>(1, 0);
  return v;
}

// Orthonormal basis for the null space of M, requiring exactly `dim`
// singular values below `threshold`.
template <typename Scalar, typename MatrixType>
MatrixType null_basis(const MatrixType& M, int dim, Scalar threshold) {
  Eigen::JacobiSVD<MatrixType> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index n = M.cols();
  if (sv(n - dim) > threshold) {
    throw Error(ErrorCode::JordanDefective,
                "real_jordan: repeated eigenvalue with a deficient eigenspace");
  }
  return svd.matrixV().rightCols(dim);
}

}  // namespace detail

/// All eigenvalues of A, grouped into real values and conjugate pairs with
/// multiplicities. Backed by Hessenberg reduction plus shifted QR.
template <typename Derived>
Spectrum<typename Derived::Scalar> eig_real(const Eigen::MatrixBase<Derived>& A,
                                             const EigenTolerances& tol = {}) {
  using Scalar = typename Derived::Scalar;
  const auto dec = detail::eigen_decompose(A, tol);
  std::vector<detail::Cluster<Scalar>> reals, complexes;
  detail::clusterize(dec, tol, reals, complexes);
  Spectrum<Scalar> out;
  for (const auto& c : reals) {
    out.real_eigs.push_back({c.center.real(), int(c.members.size())});
  }
  for (const auto& c : complexes) {
    out.complex_pairs.push_back({c.center.real(), c.center.imag(), int(c.members.size())});
  }
  return out;
}

/// Real Jordan form of a diagonalizable matrix. Every returned block has size
/// 1; real blocks are sorted ascending, complex blocks by (sigma, omega).
/// Throws JordanDefective when an eigenspace is deficient or cond(T) exceeds
/// cond_max.
template <typename Derived>
RealJordanForm<typename Derived::Scalar> real_jordan(const Eigen::MatrixBase<Derived>& A,
                                                      const EigenTolerances& tol = {}) {
  using Scalar = typename Derived::Scalar;
  using Complex = std::complex<Scalar>;
  const auto dec = detail::eigen_decompose(A, tol);
  std::vector<detail::Cluster<Scalar>> reals, complexes;
  detail::clusterize(dec, tol, reals, complexes);

  const Eigen::Index n = A.rows();
  const Scalar scale = std::max(dec.norm, Scalar(1e-300));
  RealJordanForm<Scalar> out;
  out.T.resize(n, n);
  Eigen::Index col = 0;

  for (const auto& c : reals) {
    const int k = int(c.members.size());
    Matrix<Scalar> basis;
    if (k == 1) {
      basis = dec.vectors.col(c.members.front()).real();
    } else {
      Matrix<Scalar> shifted = A - c.center.real() * Matrix<Scalar>::Identity(n, n);
      basis = detail::null_basis<Scalar>(shifted, k, tol.null_rel * scale);
    }
    for (int j = 0; j < k; ++j) {
      out.T.col(col++) = detail::canonical_real<Scalar>(basis.col(j));
      out.real_blocks.push_back({c.center.real(), 1});
    }
  }
  for (const auto& c : complexes) {
    const int k = int(c.members.size());
    Matrix<Complex> basis;
    if (k == 1) {
      basis = dec.vectors.col(c.members.front());
    } else {
      Matrix<Complex> shifted = A.template cast<Complex>() - c.center * Matrix<Complex>::Identity(n, n);
      basis = detail::null_basis<Scalar>(shifted, k, tol.null_rel * scale);
    }
    for (int j = 0; j < k; ++j) {
      const Vector<Complex> v = detail::canonical_complex<Scalar>(basis.col(j));
      out.T.col(col++) = v.real();
      out.T.col(col++) = v.imag();
      out.complex_blocks.push_back({c.center.real(), c.center.imag(), 1});
    }
  }
  if (col != n) {
    throw Error(ErrorCode::NoConvergence, "real_jordan: eigenvalue bookkeeping mismatch");
  }

  // Conditioning is judged on unit-length columns, independent of the scaling.
  Eigen::JacobiSVD<Matrix<Scalar>> svd(out.T.colwise().normalized());
  const auto& sv = svd.singularValues();
  const Scalar cond = sv(n - 1) > 0 ? sv(0) / sv(n - 1) : std::numeric_limits<Scalar>::infinity();
  if (!(cond <= tol.cond_max)) {
    std::ostringstream os;
    os << "real_jordan: eigenvector matrix condition " << cond << " exceeds " << tol.cond_max;
    throw Error(ErrorCode::JordanDefective, os.str());
  }
  if (!(out.residual(A) <= tol.jordan_rel * scale)) {
    throw Error(ErrorCode::JordanDefective, "real_jordan: reconstruction residual above tolerance");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pseudoinverse
// ---------------------------------------------------------------------------

/// Moore-Penrose pseudoinverse of a full-column-rank matrix through a
/// column-pivoted Householder QR. A pivot |R_kk| <= rank_tol * |R_00| counts
/// as rank deficiency.
template <typename Derived>
typename Derived::PlainObject pinv_full_col(const Eigen::MatrixBase<Derived>& M,
                                             double rank_tol = 1e-10) {
  using Plain = typename Derived::PlainObject;
  if (M.cols() == 0 || M.rows() < M.cols()) {
    throw Error(ErrorCode::RankDeficient, "pinv_full_col: fewer rows than columns");
  }
  Eigen::ColPivHouseholderQR<Plain> qr(M);
  qr.setThreshold(rank_tol);
  if (qr.rank() < M.cols()) {
    std::ostringstream os;
    os << "pinv_full_col: numerical rank " << qr.rank() << " < " << M.cols();
    throw Error(ErrorCode::RankDeficient, os.str());
  }
  return qr.solve(Plain::Identity(M.rows(), M.rows()));
}

}  // namespace polyobs

#endif  // POLYOBS_MATRIX_CORE_HPP
