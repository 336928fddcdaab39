#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "rabi/model.hpp"

namespace rabi {

// Dense truncated Hamiltonian, dimension 2(n_max+1), spin-major ordering
// (up block first). Diagonal +/-delta/2 + omega n; spin-flip couplings
// lambda sqrt(n+1) between (s, n) and (-s, n+1).
inline Eigen::MatrixXcd build_hamiltonian(const ModelParams& p, int n_max) {
  p.validate();
  if (n_max < 1) throw std::invalid_argument("n_max: must be >= 1");
  const int d = n_max + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
  for (int n = 0; n < d; ++n) {
    h(n, n) = p.delta / 2 + p.omega * n;
    h(d + n, d + n) = -p.delta / 2 + p.omega * n;
  }
  for (int n = 0; n + 1 < d; ++n) {
    const double c = p.lambda * std::sqrt(n + 1.0);
    h(d + n + 1, n) = c;  // <n+1, down| H |n, up>
    h(n, d + n + 1) = c;
    h(n + 1, d + n) = c;  // <n+1, up| H |n, down>
    h(d + n, n + 1) = c;
  }
  return h;
}

// P = sigma_z exp(i pi a^dag a): up_n -> (-1)^n up_n, down_n -> -(-1)^n down_n.
inline SpinorFockState apply_parity(const SpinorFockState& s) {
  SpinorFockState r = s;
  for (int n = 0; n <= s.n_max; ++n) {
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    r.up[n] = sgn * s.up[n];
    r.down[n] = -sgn * s.down[n];
  }
  return r;
}

// Zero all amplitudes outside the chain's support pattern.
// PLUS keeps (up, odd) and (down, even); MINUS the complement.
inline SpinorFockState project_chain(const SpinorFockState& s, const ParityLabel& label) {
  SpinorFockState r(s.n_max);
  const bool up_odd = (label.chain == Chain::PLUS);
  for (int n = 0; n <= s.n_max; ++n) {
    const bool odd = (n % 2 == 1);
    if (odd == up_odd) r.up[n] = s.up[n];
    if (odd != up_odd) r.down[n] = s.down[n];
  }
  return r;
}

inline SpinorFockState project_chain(const SpinorFockState& s, Chain chain) {
  return project_chain(s, label_of(chain));
}

struct HPowerDiag {
  double input_tail_mass = 0;  // input mass at levels n > n_max - j
  bool contaminated = false;   // tail mass exceeded the threshold
};

// Repeated dense H application. j ladder steps can push population past the
// cutoff, so input mass above n_max - j is reported as a contamination warning.
inline SpinorFockState apply_h_power(const Eigen::MatrixXcd& h, const SpinorFockState& s,
                                     int j, HPowerDiag* diag = nullptr,
                                     double tail_threshold = 1e-10) {
  if (j < 0) throw std::invalid_argument("j: must be non-negative");
  if (h.rows() != s.dim()) throw std::invalid_argument("apply_h_power: dimension mismatch");
  if (diag) {
    diag->input_tail_mass = s.mass_above(s.n_max - j);
    diag->contaminated = diag->input_tail_mass > tail_threshold;
  }
  Eigen::VectorXcd v = s.full_vector();
  for (int k = 0; k < j; ++k) v = h * v;
  return SpinorFockState::from_full(v);
}

inline SpinorFockState apply_h_power(const ModelParams& p, const SpinorFockState& s, int j,
                                     HPowerDiag* diag = nullptr,
                                     double tail_threshold = 1e-10) {
  return apply_h_power(build_hamiltonian(p, s.n_max), s, j, diag, tail_threshold);
}

// Exact propagator e^{-iHt} at fixed n_max via Hermitian eigendecomposition.
// Deliberately shares no error mechanism with the series engine.
class ExactPropagator {
 public:
  ExactPropagator(const ModelParams& p, int n_max) : n_max_(n_max) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(build_hamiltonian(p, n_max));
    if (es.info() != Eigen::Success)
      throw std::runtime_error("evolve_exact: eigendecomposition failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
  }

  int n_max() const { return n_max_; }
  const Eigen::VectorXd& eigenvalues() const { return evals_; }

  SpinorFockState evolve(const SpinorFockState& s, double t) const {
    if (s.n_max != n_max_) throw std::invalid_argument("evolve_exact: n_max mismatch");
    Eigen::VectorXcd c = evecs_.adjoint() * s.full_vector();
    for (Eigen::Index k = 0; k < c.size(); ++k)
      c[k] *= std::exp(Complex(0, -evals_[k] * t));
    return SpinorFockState::from_full(evecs_ * c);
  }

 private:
  int n_max_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXcd evecs_;
};

inline SpinorFockState evolve_exact(const ModelParams& p, const SpinorFockState& s, double t) {
  return ExactPropagator(p, s.n_max).evolve(s, t);
}

}  // namespace rabi
