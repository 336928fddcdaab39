#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rabi/model.hpp"

namespace rabi {

// Whether a coefficient function pairs with |z> + |-z> (even Fock support)
// or |z> - |-z> (odd Fock support), with the un-normalized coherent state
// |z> = exp(z a^dag)|0>, z = zeta + i eta.
enum class CombinationSign { EVEN, ODD };

inline CombinationSign flipped(CombinationSign s) {
  return s == CombinationSign::EVEN ? CombinationSign::ODD : CombinationSign::EVEN;
}

inline bool sign_matches(CombinationSign s, int n) {
  return (n % 2 == 0) == (s == CombinationSign::EVEN);
}

namespace detail {

// q! stays finite in double up to q = 170; all degree caps respect this.
constexpr int kMaxFactorialArg = 170;

inline const std::array<double, kMaxFactorialArg + 1>& factorials() {
  static const auto table = [] {
    std::array<double, kMaxFactorialArg + 1> t{};
    t[0] = 1.0;
    for (int k = 1; k <= kMaxFactorialArg; ++k) t[k] = t[k - 1] * k;
    return t;
  }();
  return table;
}

inline const std::array<double, kMaxFactorialArg + 1>& sqrt_factorials() {
  static const auto table = [] {
    std::array<double, kMaxFactorialArg + 1> t{};
    const auto& f = factorials();
    for (int k = 0; k <= kMaxFactorialArg; ++k) t[k] = std::sqrt(f[k]);
    return t;
  }();
  return table;
}

inline void check_degree_range(int q) {
  if (q > kMaxFactorialArg)
    throw std::invalid_argument("polynomial degree exceeds representable factorial range (170)");
}

// State-space weight of a polynomial term c z^p zbar^q e^{-|z|^2}: the magnitude
// of the Fock amplitude it reconstructs (at n = q - p). Raw |c| is a poor pruning
// metric because the factorial ratio amplifies small coefficients.
inline double term_weight(int p, int q, double abs_c) {
  return abs_c * std::numbers::pi * factorials()[q] / sqrt_factorials()[q - p];
}

// Max-amplitude proxy of a point mass w delta(z - z0).
inline double delta_weight(const Complex& z0, const Complex& w) {
  return std::abs(w) * std::exp(std::norm(z0) / 2);
}

inline Complex int_pow(Complex z, int k) {
  Complex r = 1;
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

}  // namespace detail

// Exact Gaussian monomial integral over the plane:
// G(a, b) = int e^{-zeta^2 - eta^2} zeta^a eta^b dzeta deta; zero for odd a or b,
// otherwise sqrt(pi) (a-1)!!/2^{a/2} times the same in b.
inline double gaussian_moment(int a, int b) {
  if (a < 0 || b < 0) throw std::invalid_argument("gaussian_moment: negative exponent");
  if (a % 2 == 1 || b % 2 == 1) return 0.0;
  auto g = [](int k) {
    double v = std::sqrt(std::numbers::pi);
    for (int i = 2; i <= k; i += 2) v *= (i - 1) / 2.0;
    return v;
  };
  return g(a) * g(b);
}

struct DeltaTerm {
  Complex z0;  // point zeta0 + i eta0
  Complex w;   // weight of w delta(zeta - zeta0) delta(eta - eta0)
};

// Closed-form coefficient function over (zeta, eta): point masses plus a
// Gaussian-weighted polynomial. The polynomial is stored over the monomials
// z^p zbar^q e^{-|z|^2} (z = zeta + i eta, |z|^2 = zeta^2 + eta^2), for which
// the holomorphic moments are exact single products:
//   int z^p zbar^q e^{-|z|^2} z^k dzeta deta = pi q! [q == p + k].
// Monomials with p > q carry identically zero holomorphic moments and reconstruct
// to the zero vector against every combination, so they are dropped at creation.
// Functions integrate against the plain measure dzeta deta.
struct CoefficientFunction {
  std::vector<DeltaTerm> delta_terms;
  std::vector<std::vector<Complex>> rows;  // rows[p][q], entries with q >= p

  bool has_deltas() const {
    for (const auto& d : delta_terms)
      if (d.w != Complex(0)) return true;
    return false;
  }

  int delta_term_count() const { return static_cast<int>(delta_terms.size()); }

  int poly_term_count() const {
    int n = 0;
    for (const auto& row : rows)
      for (const auto& c : row)
        if (c != Complex(0)) ++n;
    return n;
  }

  bool is_zero() const { return !has_deltas() && poly_term_count() == 0; }

  // Max total degree p + q of a nonzero term (the (zeta, eta) polynomial degree),
  // -1 when the polynomial part is empty.
  int max_degree() const {
    int d = -1;
    for (int p = 0; p < static_cast<int>(rows.size()); ++p)
      for (int q = p; q < static_cast<int>(rows[p].size()); ++q)
        if (rows[p][q] != Complex(0)) d = std::max(d, p + q);
    return d;
  }

  // Max q - p of a nonzero term: the highest k with a nonzero polynomial moment.
  int max_diag() const {
    int d = -1;
    for (int p = 0; p < static_cast<int>(rows.size()); ++p)
      for (int q = p; q < static_cast<int>(rows[p].size()); ++q)
        if (rows[p][q] != Complex(0)) d = std::max(d, q - p);
    return d;
  }

  Complex poly_at(int p, int q) const {
    if (p < 0 || q < 0 || p >= static_cast<int>(rows.size())) return 0;
    if (q >= static_cast<int>(rows[p].size())) return 0;
    return rows[p][q];
  }

  void add_poly(int p, int q, Complex c) {
    if (p < 0 || q < 0) throw std::invalid_argument("add_poly: negative exponent");
    if (c == Complex(0) || p > q) return;  // p > q terms are exact nulls
    detail::check_degree_range(q);
    if (p >= static_cast<int>(rows.size())) rows.resize(p + 1);
    if (q >= static_cast<int>(rows[p].size())) rows[p].resize(q + 1, Complex(0));
    rows[p][q] += c;
  }

  void add_delta(Complex z0, Complex w) {
    for (auto& d : delta_terms) {
      if (d.z0 == z0) {
        d.w += w;
        return;
      }
    }
    delta_terms.push_back({z0, w});
  }

  void scale(Complex s) {
    for (auto& d : delta_terms) d.w *= s;
    for (auto& row : rows)
      for (auto& c : row) c *= s;
  }

  CoefficientFunction scaled(Complex s) const {
    CoefficientFunction r = *this;
    r.scale(s);
    return r;
  }

  void add_scaled(const CoefficientFunction& o, Complex s) {
    for (const auto& d : o.delta_terms) add_delta(d.z0, d.w * s);
    for (int p = 0; p < static_cast<int>(o.rows.size()); ++p)
      for (int q = p; q < static_cast<int>(o.rows[p].size()); ++q)
        if (o.rows[p][q] != Complex(0)) add_poly(p, q, o.rows[p][q] * s);
  }

  // Multiplication by z = zeta + i eta: deltas reweighted in place, polynomial
  // terms shift (p, q) -> (p+1, q). Shifts landing on p > q become exact nulls.
  CoefficientFunction multiplied_by_z() const {
    CoefficientFunction r;
    r.delta_terms = delta_terms;
    for (auto& d : r.delta_terms) d.w *= d.z0;
    for (int p = 0; p < static_cast<int>(rows.size()); ++p)
      for (int q = p; q < static_cast<int>(rows[p].size()); ++q)
        if (rows[p][q] != Complex(0)) r.add_poly(p + 1, q, rows[p][q]);
    return r;
  }

  // Full moment M_k = int f(zeta, eta) z^k dzeta deta.
  Complex moment(int k) const {
    if (k < 0) throw std::invalid_argument("moment: negative order");
    Complex m = 0;
    for (const auto& d : delta_terms) m += d.w * detail::int_pow(d.z0, k);
    const auto& fact = detail::factorials();
    for (int p = 0; p < static_cast<int>(rows.size()); ++p) {
      const int q = p + k;
      if (q < static_cast<int>(rows[p].size()) && rows[p][q] != Complex(0))
        m += rows[p][q] * std::numbers::pi * fact[q];
    }
    return m;
  }

  // Single-pass accumulation of polynomial moments into m[0..m.size()-1].
  void accumulate_poly_moments(std::vector<Complex>& m) const {
    const auto& fact = detail::factorials();
    const int k_hi = static_cast<int>(m.size()) - 1;
    for (int p = 0; p < static_cast<int>(rows.size()); ++p) {
      const int q_hi = std::min(static_cast<int>(rows[p].size()) - 1, p + k_hi);
      for (int q = p; q <= q_hi; ++q)
        if (rows[p][q] != Complex(0)) m[q - p] += rows[p][q] * std::numbers::pi * fact[q];
    }
  }

  // Delta-term moments for k = 0..m.size()-1.
  void accumulate_delta_moments(std::vector<Complex>& m) const {
    for (const auto& d : delta_terms) {
      Complex zk = d.w;
      for (int k = 0; k < static_cast<int>(m.size()); ++k) {
        m[k] += zk;
        zk *= d.z0;
      }
    }
  }

  double max_weight() const {
    double s = 0;
    for (const auto& d : delta_terms) s = std::max(s, detail::delta_weight(d.z0, d.w));
    for (int p = 0; p < static_cast<int>(rows.size()); ++p)
      for (int q = p; q < static_cast<int>(rows[p].size()); ++q)
        if (rows[p][q] != Complex(0))
          s = std::max(s, detail::term_weight(p, q, std::abs(rows[p][q])));
    return s;
  }

  // Drop polynomial terms whose state-space weight falls below eps times the
  // function's max weight; returns the dropped weight. Delta terms are never
  // pruned (the recurrences only reweight them).
  double prune(double eps) {
    if (eps <= 0 || rows.empty()) return 0.0;
    const double scale = max_weight();
    if (scale == 0) return 0.0;
    double dropped = 0;
    for (int p = 0; p < static_cast<int>(rows.size()); ++p) {
      for (int q = p; q < static_cast<int>(rows[p].size()); ++q) {
        if (rows[p][q] == Complex(0)) continue;
        const double w = detail::term_weight(p, q, std::abs(rows[p][q]));
        if (w < eps * scale) {
          dropped += w;
          rows[p][q] = 0;
        }
      }
    }
    while (!rows.empty()) {  // trim trailing all-zero rows
      bool empty = true;
      for (const auto& c : rows.back())
        if (c != Complex(0)) empty = false;
      if (!empty) break;
      rows.pop_back();
    }
    return dropped;
  }

  // Pointwise value of the Gaussian-polynomial part (delta terms excluded);
  // used by the quadrature cross-checks.
  Complex evaluate_smooth(double zeta, double eta) const {
    const Complex z(zeta, eta);
    const Complex zb = std::conj(z);
    Complex s = 0;
    for (int p = 0; p < static_cast<int>(rows.size()); ++p)
      for (int q = p; q < static_cast<int>(rows[p].size()); ++q)
        if (rows[p][q] != Complex(0))
          s += rows[p][q] * detail::int_pow(z, p) * detail::int_pow(zb, q);
    return s * std::exp(-(zeta * zeta + eta * eta));
  }
};

// M_k = int f(zeta, eta) (zeta + i eta)^k dzeta deta, exact.
inline Complex holo_moment(const CoefficientFunction& f, int k) { return f.moment(k); }

inline CoefficientFunction multiply_by_z(const CoefficientFunction& f) {
  return f.multiplied_by_z();
}

// |n> as a coefficient function: (1/(2 pi sqrt(n!))) zbar^n e^{-|z|^2} paired with
// the even combination for even n, odd for odd n. The 1/2 combination prefactor is
// folded in, so reconstruction needs no extra factors.
inline std::pair<CoefficientFunction, CombinationSign> fock_to_coefficient(int n) {
  if (n < 0) throw std::invalid_argument("fock_to_coefficient: negative n");
  detail::check_degree_range(n);
  CoefficientFunction f;
  f.add_poly(0, n, 1.0 / (2 * std::numbers::pi * detail::sqrt_factorials()[n]));
  return {std::move(f), n % 2 == 0 ? CombinationSign::EVEN : CombinationSign::ODD};
}

// Fock amplitudes of int f(zeta, eta) [|z> +/- |-z>] dzeta deta:
// amplitude_n = M_n (1 +/- (-1)^n)/sqrt(n!); the mismatched parity is exactly zero.
inline Eigen::VectorXcd reconstruct_fock_amplitudes(const CoefficientFunction& f,
                                                    CombinationSign sign, int n_max) {
  if (n_max < 0) throw std::invalid_argument("reconstruct: negative n_max");
  detail::check_degree_range(n_max);
  std::vector<Complex> m(n_max + 1, Complex(0));
  f.accumulate_poly_moments(m);
  f.accumulate_delta_moments(m);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(n_max + 1);
  const auto& sf = detail::sqrt_factorials();
  for (int n = 0; n <= n_max; ++n)
    if (sign_matches(sign, n)) amps[n] = 2.0 * m[n] / sf[n];
  return amps;
}

// Annihilation on a combination: multiply by z and flip the combination parity.
inline std::pair<CoefficientFunction, CombinationSign> apply_a(const CoefficientFunction& f,
                                                               CombinationSign sign) {
  return {f.multiplied_by_z(), flipped(sign)};
}

namespace detail {

// Kernel K·zbar^K/K! e^{-|z|^2} scaled by a moment: the collapsed form of the
// reconstruction kernels sum_l [K/(l!(K-l)!)] zeta^{K-l}(-i eta)^l / pi.
inline void add_kernel_term(CoefficientFunction& out, int k_out, Complex m) {
  if (m != Complex(0))
    out.add_poly(0, k_out, m * static_cast<double>(k_out) /
                               (std::numbers::pi * factorials()[k_out]));
}

}  // namespace detail

// Creation operator on a combination: output has flipped parity and purely
// Gaussian-polynomial content built from the input moments,
//   out += sum_k M_k(f) (k+1) zbar^{k+1} e^{-|z|^2} / (pi (k+1)!),
// over k of the input parity. Polynomial moments self-terminate at the diagonal
// degree; delta-term moments are truncated at the m_max-th term of the sum
// (k = 2 m_max for even input, 2 m_max + 1 for odd). When truncation occurs the
// state-space weight of the first omitted term is reported through tail_weight.
inline std::pair<CoefficientFunction, CombinationSign> apply_adag(
    const CoefficientFunction& f, CombinationSign sign, int m_max,
    double* tail_weight = nullptr) {
  if (m_max < 0) throw std::invalid_argument("apply_adag: negative m_max");
  const bool even_in = (sign == CombinationSign::EVEN);
  const int k_first = even_in ? 0 : 1;
  const int k_delta_cap = f.has_deltas() ? (even_in ? 2 * m_max : 2 * m_max + 1) : -1;
  const int k_hi = std::max(f.max_diag(), k_delta_cap);

  CoefficientFunction out;
  if (k_hi >= k_first) {
    std::vector<Complex> m_poly(k_hi + 1, Complex(0)), m_delta(k_hi + 1, Complex(0));
    f.accumulate_poly_moments(m_poly);
    f.accumulate_delta_moments(m_delta);
    for (int k = k_first; k <= k_hi; k += 2) {
      Complex mk = m_poly[k];
      if (k <= k_delta_cap) mk += m_delta[k];
      detail::add_kernel_term(out, k + 1, mk);
    }
  }
  if (tail_weight) {
    *tail_weight = 0;
    if (f.has_deltas()) {
      const int k_next = k_delta_cap + 2;
      Complex m_next = 0;
      for (const auto& d : f.delta_terms) m_next += d.w * detail::int_pow(d.z0, k_next);
      if (k_next + 1 <= detail::kMaxFactorialArg)
        *tail_weight =
            2.0 * std::abs(m_next) * (k_next + 1) / detail::sqrt_factorials()[k_next + 1];
    }
  }
  return {std::move(out), flipped(sign)};
}

// Number operator a^dag a as the composition a^dag after a; combination parity
// is preserved.
inline std::pair<CoefficientFunction, CombinationSign> apply_n(const CoefficientFunction& f,
                                                               CombinationSign sign,
                                                               int m_max,
                                                               double* tail_weight = nullptr) {
  auto [fa, sa] = apply_a(f, sign);
  return apply_adag(fa, sa, m_max, tail_weight);
}

}  // namespace rabi
