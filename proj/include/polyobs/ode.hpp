#ifndef POLYOBS_ODE_HPP
#define POLYOBS_ODE_HPP

#include <Eigen/Dense>

namespace polyobs {

/// One classical fourth-order Runge-Kutta step of x' = f(t, x).
template <typename Vec, typename Rhs>
Vec rk4_step(const Rhs& f, double t, const Vec& x, double dt) {
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + 0.5 * dt, (x + 0.5 * dt * k1).eval());
  const Vec k3 = f(t + 0.5 * dt, (x + 0.5 * dt * k2).eval());
  const Vec k4 = f(t + dt, (x + dt * k3).eval());
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace polyobs

#endif  // POLYOBS_ODE_HPP
