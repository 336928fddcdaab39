#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "rabi/rabi.hpp"

namespace testutil {

using rabi::Complex;

inline rabi::SpinorFockState random_state(int n_max, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  rabi::SpinorFockState s(n_max);
  for (int n = 0; n <= n_max; ++n) {
    s.up[n] = Complex(u(gen), u(gen));
    s.down[n] = Complex(u(gen), u(gen));
  }
  const double nrm = s.norm();
  s.up /= nrm;
  s.down /= nrm;
  return s;
}

inline double rel_err(const rabi::SpinorFockState& got, const rabi::SpinorFockState& want) {
  return (got - want).full_vector().norm() / want.full_vector().norm();
}

// Random Gaussian-polynomial coefficient function with q - p of a fixed parity
// (so it is meaningful content for one combination sign) and degree <= deg.
// Coefficients are damped by 1/(p+q)! so moments and function values stay O(1),
// keeping absolute tolerances meaningful across degrees.
inline rabi::CoefficientFunction random_poly_cf(int deg, bool even_diag, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  rabi::CoefficientFunction f;
  for (int p = 0; p * 2 <= deg; ++p) {
    for (int q = p; p + q <= deg; ++q) {
      if (((q - p) % 2 == 0) != even_diag) continue;
      double fact = 1;
      for (int i = 2; i <= p + q; ++i) fact *= i;
      f.add_poly(p, q, Complex(u(gen), u(gen)) / fact);
    }
  }
  return f;
}

namespace detail {

// force_depth levels are split unconditionally: a Gaussian bump on a wide
// interval is invisible to the first coarse Simpson samples, so an error-driven
// stop at the top level would accept a wrong estimate.
template <typename F>
Complex simpson_rec(const F& f, double a, double m, double b, Complex fa, Complex fm,
                    Complex fb, Complex whole, double tol, int depth, int force_depth) {
  const double lm = (a + m) / 2, rm = (m + b) / 2;
  const Complex flm = f(lm), frm = f(rm);
  const Complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Complex delta = left + right - whole;
  if (force_depth <= 0 && (depth <= 0 || std::abs(delta) < 15 * tol))
    return left + right + delta / 15.0;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, tol / 2, depth - 1, force_depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, tol / 2, depth - 1, force_depth - 1);
}

}  // namespace detail

template <typename F>
Complex adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 24,
                         int force_depth = 4) {
  const double m = (a + b) / 2;
  const Complex fa = f(a), fm = f(m), fb = f(b);
  const Complex whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth, force_depth);
}

// 2-D trapezoidal sums under mesh halving: geometrically convergent for smooth
// integrands with Gaussian decay, adapting the mesh until successive levels agree.
template <typename F2>
Complex trapezoid_2d(const F2& f, double a, double b, double tol, int max_level = 8) {
  Complex prev = 0;
  int n = 16;
  for (int level = 0; level <= max_level; ++level, n *= 2) {
    const double h = (b - a) / n;
    Complex s = 0;
    for (int i = 0; i <= n; ++i) {
      const double wx = (i == 0 || i == n) ? 0.5 : 1.0;
      for (int j = 0; j <= n; ++j) {
        const double wy = (j == 0 || j == n) ? 0.5 : 1.0;
        s += wx * wy * f(a + i * h, a + j * h);
      }
    }
    s *= h * h;
    if (level > 0 && std::abs(s - prev) < tol) return s;
    prev = s;
  }
  return prev;
}

// Independent numerical evaluation of int f(zeta, eta) (zeta + i eta)^k dzeta deta
// for the smooth (Gaussian-polynomial) part, on [-8, 8]^2 (the integrand decays
// like e^{-64} at the boundary).
inline Complex quad_moment(const rabi::CoefficientFunction& f, int k, double tol = 1e-11) {
  auto integrand = [&](double zeta, double eta) {
    Complex zk = 1;
    const Complex z(zeta, eta);
    for (int i = 0; i < k; ++i) zk *= z;
    return f.evaluate_smooth(zeta, eta) * zk;
  };
  return trapezoid_2d(integrand, -8.0, 8.0, tol);
}

// Dense Fock ladder matrices acting on amplitude vectors (for cross-checks).
inline Eigen::VectorXcd ladder_lower(const Eigen::VectorXcd& amps) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(amps.size());
  for (Eigen::Index n = 0; n + 1 < amps.size(); ++n)
    out[n] = std::sqrt(static_cast<double>(n + 1)) * amps[n + 1];
  return out;
}

inline Eigen::VectorXcd ladder_raise(const Eigen::VectorXcd& amps) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(amps.size());
  for (Eigen::Index n = 1; n < amps.size(); ++n)
    out[n] = std::sqrt(static_cast<double>(n)) * amps[n - 1];
  return out;
}

}  // namespace testutil
