#ifndef POLYOBS_TESTS_FIXTURES_HPP
#define POLYOBS_TESTS_FIXTURES_HPP

#include <cmath>
#include <random>
#include <string>

#include "polyobs/matrix_core.hpp"

namespace fixtures {

using polyobs::MatrixXd;
using polyobs::VectorXd;

inline std::string scenario_path(const std::string& name) {
  return std::string(POLYOBS_SCENARIO_DIR) + "/" + name + ".txt";
}

// Third-order CT example.
inline MatrixXd raissi_A() {
  const double s3 = std::sqrt(3.0);
  MatrixXd A(3, 3);
  A << 2, 0, 0, 1, -4, s3, -1, -s3, -4;
  return A;
}
inline MatrixXd raissi_C() { return MatrixXd{{1, 0, 0}}; }
inline MatrixXd raissi_W() { return MatrixXd{{-10}, {0}, {3.4}}; }
inline MatrixXd raissi_L() { return MatrixXd{{8.7827}, {0.5239}, {-1.8195}}; }
inline MatrixXd raissi_P_printed() {
  return MatrixXd{{-0.289, 0, 0}, {0.289, 0, 1}, {0.0088, -1, 0}};
}
inline MatrixXd raissi_Q_printed() {
  return MatrixXd{{-6.7827, 0, 0}, {0, -4, 1.732}, {0, -1.732, -4}};
}

inline MatrixXd chua_A() { return MatrixXd{{-1, 1}, {-14.9, -0.29}}; }

// Fifth-order DT example.
inline MatrixXd meslem_A() {
  const double r = 0.25 * std::sqrt(2.0);
  MatrixXd A(5, 5);
  A << -0.54, 0.45, 0.36, 0, 0,
       0.63, 0.45, 0.18, 0.36, 0,
       0.09, 0.45, 0.27, 0.09, 0.18,
       0, 0, 0.25, r, -r,
       0, 0, 0, r, -r;
  return A;
}
inline MatrixXd meslem_C() { return MatrixXd{{1, 0, 0, 0, 0}, {0, 0, 0, 1, 0}}; }
inline MatrixXd meslem_L() {
  MatrixXd Lt(2, 5);
  Lt << -0.3218, 0.5486, 0.0756, 0.1861, -0.1631,
        0.1516, 0.1922, 0.0996, 0.1457, 0.0113;
  return Lt.transpose();
}
inline MatrixXd meslem_P_printed() {
  MatrixXd P(5, 5);
  P << 0.0034, 0.0953, 0.0557, 0.0286, -0.0001,
       -0.2835, -0.0670, 0.2871, 0.3631, -0.1784,
       -0.2686, -0.6393, 0.7787, 0.2609, 0.0932,
       0.2801, -0.0283, -0.3428, -0.3917, 1.1785,
       0.9798, -0.1739, -0.6796, 0.5974, -0.0312;
  return P;
}
inline MatrixXd meslem_Q_printed() {
  MatrixXd Q = MatrixXd::Zero(5, 5);
  Q(0, 0) = 0.7288;
  Q.block(1, 1, 2, 2) << 0.0946, 0.0347, -0.0347, 0.0946;
  Q.block(3, 3, 2, 2) << -0.2809, 0.2811, -0.2811, -0.2809;
  return Q;
}

inline MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = u(rng);
  return M;
}

// Random real matrix with a prescribed spectrum: a block-diagonal real Jordan
// matrix conjugated by a well-conditioned random basis. Stability is set by
// the caller through the eigenvalue ranges.
struct PlantedSpectrum {
  MatrixXd A;
  int n_real = 0;
  int n_pairs = 0;
};

inline PlantedSpectrum planted(std::mt19937_64& rng, int n, bool dt, double max_cond = 1e3) {
  std::uniform_real_distribution<double> u(0, 1);
  PlantedSpectrum out;
  MatrixXd J = MatrixXd::Zero(n, n);
  int at = 0;
  while (at < n) {
    const bool pair = at + 1 < n && u(rng) < 0.5;
    if (pair) {
      double sigma, omega;
      if (dt) {
        const double r = 0.05 + 0.9 * u(rng), th = 0.05 + 3.0 * u(rng);
        sigma = r * std::cos(th);
        omega = r * std::sin(th);
      } else {
        sigma = -(0.1 + 3 * u(rng));
        omega = 0.05 + 5 * u(rng);
      }
      J(at, at) = sigma;
      J(at, at + 1) = omega;
      J(at + 1, at) = -omega;
      J(at + 1, at + 1) = sigma;
      at += 2;
      ++out.n_pairs;
    } else {
      J(at, at) = dt ? -0.95 + 1.9 * u(rng) : -(0.1 + 5 * u(rng));
      at += 1;
      ++out.n_real;
    }
  }
  MatrixXd T;
  for (;;) {
    T = random_matrix(rng, n, n) + MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<MatrixXd> svd(T);
    const auto& s = svd.singularValues();
    if (s(n - 1) > 0 && s(0) / s(n - 1) < max_cond) break;
  }
  out.A = T * J * T.inverse();
  return out;
}

}  // namespace fixtures

#endif  // POLYOBS_TESTS_FIXTURES_HPP
