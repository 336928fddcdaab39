#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace rabi {

using Complex = std::complex<double>;

// Model parameters of H = (delta/2) sigma_z + omega a^dag a + lambda sigma_x (a + a^dag),
// hbar = 1. The coupling ratio g = lambda/omega classifies the regime
// (weak ~1e-3, ultrastrong ~0.1, deep strong >= 1).
struct ModelParams {
  double delta = 1.0;
  double omega = 1.0;
  double lambda = 0.5;

  double g() const { return lambda / omega; }

  void validate() const {
    if (!(omega > 0)) throw std::invalid_argument("omega: must be positive");
    if (!(delta >= 0)) throw std::invalid_argument("delta: must be non-negative");
    if (!std::isfinite(delta) || !std::isfinite(omega) || !std::isfinite(lambda))
      throw std::invalid_argument("params: entries must be finite");
  }
};

// The parity operator P = sigma_z exp(i pi a^dag a) commutes with H and splits the
// Hilbert space into two invariant chains of alternating (spin, photon) support.
enum class Chain { PLUS, MINUS };

// Chain label plus the computed P eigenvalue on that chain. With the upper spinor
// component meaning sigma_z = +1: PLUS = {(up, odd n), (down, even n)} has p = -1,
// MINUS = {(up, even n), (down, odd n)} has p = +1. The eigenvalue is stored
// explicitly rather than inferred from the chain name.
struct ParityLabel {
  Chain chain = Chain::PLUS;
  int p_eigenvalue = -1;
};

inline ParityLabel label_of(Chain c) {
  return {c, c == Chain::PLUS ? -1 : +1};
}

// Two-component (spin tensor photon) state in a truncated Fock basis.
// up[n] = <n, up|psi>, down[n] = <n, down|psi>, 0 <= n <= n_max.
struct SpinorFockState {
  int n_max = 0;
  Eigen::VectorXcd up;
  Eigen::VectorXcd down;

  SpinorFockState() : up(Eigen::VectorXcd::Zero(1)), down(Eigen::VectorXcd::Zero(1)) {}
  explicit SpinorFockState(int n_max_)
      : n_max(n_max_),
        up(Eigen::VectorXcd::Zero(n_max_ + 1)),
        down(Eigen::VectorXcd::Zero(n_max_ + 1)) {
    if (n_max_ < 0) throw std::invalid_argument("n_max: must be non-negative");
  }

  int dim() const { return 2 * (n_max + 1); }

  double norm2() const { return up.squaredNorm() + down.squaredNorm(); }
  double norm() const { return std::sqrt(norm2()); }

  // Occupation of the topmost retained Fock level (truncation diagnostic).
  double tail_mass() const { return std::norm(up[n_max]) + std::norm(down[n_max]); }

  // Mass at Fock levels n > n_keep.
  double mass_above(int n_keep) const {
    double m = 0;
    for (int n = n_keep + 1; n <= n_max; ++n) m += std::norm(up[n]) + std::norm(down[n]);
    return m;
  }

  // Packed vector in spin-major ordering: (up,0..n_max) then (down,0..n_max).
  // This ordering is fixed; all dense-matrix code and serialization use it.
  Eigen::VectorXcd full_vector() const {
    Eigen::VectorXcd v(dim());
    v.head(n_max + 1) = up;
    v.tail(n_max + 1) = down;
    return v;
  }

  static SpinorFockState from_full(const Eigen::VectorXcd& v) {
    if (v.size() % 2 != 0) throw std::invalid_argument("full vector: even size required");
    SpinorFockState s(static_cast<int>(v.size() / 2) - 1);
    s.up = v.head(s.n_max + 1);
    s.down = v.tail(s.n_max + 1);
    return s;
  }
};

inline SpinorFockState operator+(const SpinorFockState& a, const SpinorFockState& b) {
  if (a.n_max != b.n_max) throw std::invalid_argument("state sum: n_max mismatch");
  SpinorFockState r = a;
  r.up += b.up;
  r.down += b.down;
  return r;
}

inline SpinorFockState operator-(const SpinorFockState& a, const SpinorFockState& b) {
  if (a.n_max != b.n_max) throw std::invalid_argument("state difference: n_max mismatch");
  SpinorFockState r = a;
  r.up -= b.up;
  r.down -= b.down;
  return r;
}

inline SpinorFockState operator*(Complex c, const SpinorFockState& a) {
  SpinorFockState r = a;
  r.up *= c;
  r.down *= c;
  return r;
}

}  // namespace rabi
