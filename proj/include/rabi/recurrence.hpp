#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rabi/coherent_calculus.hpp"
#include "rabi/model.hpp"

namespace rabi {

// Truncation knobs for the coefficient-space recurrences. pruned_mass accumulates
// the state-space weight of dropped polynomial terms over a run (diagnostic).
struct TruncationPolicy {
  int m_max = 16;           // cap on delta-term contributions to the kernel sums
  int deg_max = 160;        // hard cap on Gaussian-polynomial total degree
  double prune_eps = 1e-14; // relative state-space weight below which terms drop
  double pruned_mass = 0;

  void validate() const {
    if (m_max < 0) throw std::invalid_argument("m_max: must be non-negative");
    if (prune_eps < 0) throw std::invalid_argument("prune_eps: must be non-negative");
    if (deg_max < 2 * m_max + 2)
      throw std::invalid_argument("deg_max: must be >= 2*m_max + 2");
    if (deg_max > detail::kMaxFactorialArg)
      throw std::invalid_argument("deg_max: exceeds representable factorial range (170)");
  }
};

// One parity chain's pair of coefficient functions at recurrence order j.
// PLUS pairs f_upper with the ODD combination and f_lower with EVEN; MINUS is
// reversed. Order 0 holds the initial decomposition.
struct ParityComponent {
  ParityLabel label = label_of(Chain::PLUS);
  CoefficientFunction f_upper;
  CoefficientFunction f_lower;
  int order = 0;

  CombinationSign upper_sign() const {
    return label.chain == Chain::PLUS ? CombinationSign::ODD : CombinationSign::EVEN;
  }
  CombinationSign lower_sign() const { return flipped(upper_sign()); }
};

// Fock-basis content of a component: upper -> up, lower -> down, each through its
// combination sign (the opposite-parity entries are exact zeros).
inline SpinorFockState reconstruct_component(const ParityComponent& comp, int n_max) {
  SpinorFockState s(n_max);
  s.up = reconstruct_fock_amplitudes(comp.f_upper, comp.upper_sign(), n_max);
  s.down = reconstruct_fock_amplitudes(comp.f_lower, comp.lower_sign(), n_max);
  return s;
}

// Per-order trace record.
struct OrderDiag {
  int order = 0;
  int delta_terms = 0;
  int poly_terms = 0;
  int max_degree = -1;
  double pruned_mass = 0;  // running policy total after this order
  double oracle_residual = std::numeric_limits<double>::quiet_NaN();
};

inline OrderDiag make_order_diag(const ParityComponent& comp, const TruncationPolicy& pol) {
  OrderDiag d;
  d.order = comp.order;
  d.delta_terms = comp.f_upper.delta_term_count() + comp.f_lower.delta_term_count();
  d.poly_terms = comp.f_upper.poly_term_count() + comp.f_lower.poly_term_count();
  d.max_degree = std::max(comp.f_upper.max_degree(), comp.f_lower.max_degree());
  d.pruned_mass = pol.pruned_mass;
  return d;
}

namespace detail {

// Shared body of the two chain recurrences (they mirror in kernel parity):
//   upper' = +(delta/2) upper + lambda z lower + kernels_p [lambda M_{p-1}(lower) + omega M_p(upper)]
//   lower' = -(delta/2) lower + lambda z upper + kernels_p'[lambda M_{p-1}(upper) + omega M_p(lower)]
// with kernel indices p of the upper combination's parity on the upper line and
// the opposite parity on the lower line. Polynomial moment contributions
// self-terminate at the diagonal degree; delta-term contributions enter only for
// kernel indices within the m_max cap. The whole update carries the 1/pi
// normalization that keeps every order under the plain dzeta deta measure.
inline ParityComponent step_chain(const ParityComponent& comp, const ModelParams& prm,
                                  TruncationPolicy& pol) {
  prm.validate();
  pol.validate();
  const CoefficientFunction& fu = comp.f_upper;
  const CoefficientFunction& fl = comp.f_lower;
  const bool upper_odd = (comp.label.chain == Chain::PLUS);

  ParityComponent next;
  next.label = comp.label;
  next.order = comp.order + 1;
  next.f_upper = fu.scaled(prm.delta / 2);
  next.f_upper.add_scaled(fl.multiplied_by_z(), prm.lambda);
  next.f_lower = fl.scaled(-prm.delta / 2);
  next.f_lower.add_scaled(fu.multiplied_by_z(), prm.lambda);

  const int diag_u = fu.max_diag();
  const int diag_l = fl.max_diag();
  const bool any_delta = fu.has_deltas() || fl.has_deltas();
  const int cap_odd = any_delta ? 2 * pol.m_max + 1 : -1;
  const int cap_even = any_delta ? 2 * pol.m_max + 2 : -1;

  const int p_up_cap = upper_odd ? cap_odd : cap_even;
  const int p_lo_cap = upper_odd ? cap_even : cap_odd;
  const int p_up_max = std::max({diag_l + 1, diag_u, p_up_cap});
  const int p_lo_max = std::max({diag_u + 1, diag_l, p_lo_cap});
  const int k_hi = std::max(p_up_max, p_lo_max);

  if (k_hi >= 1) {
    std::vector<Complex> mu_poly(k_hi + 1, Complex(0)), mu_delta(k_hi + 1, Complex(0));
    std::vector<Complex> ml_poly(k_hi + 1, Complex(0)), ml_delta(k_hi + 1, Complex(0));
    fu.accumulate_poly_moments(mu_poly);
    fu.accumulate_delta_moments(mu_delta);
    fl.accumulate_poly_moments(ml_poly);
    fl.accumulate_delta_moments(ml_delta);

    auto moment_of = [](const std::vector<Complex>& poly, const std::vector<Complex>& delta,
                        int k, bool with_delta) {
      return with_delta ? poly[k] + delta[k] : poly[k];
    };

    for (int p = upper_odd ? 1 : 2; p <= p_up_max; p += 2) {
      const bool wd = p <= p_up_cap;
      const Complex m = prm.lambda * moment_of(ml_poly, ml_delta, p - 1, wd) +
                        prm.omega * moment_of(mu_poly, mu_delta, p, wd);
      add_kernel_term(next.f_upper, p, m);
    }
    for (int p = upper_odd ? 2 : 1; p <= p_lo_max; p += 2) {
      const bool wd = p <= p_lo_cap;
      const Complex m = prm.lambda * moment_of(mu_poly, mu_delta, p - 1, wd) +
                        prm.omega * moment_of(ml_poly, ml_delta, p, wd);
      add_kernel_term(next.f_lower, p, m);
    }
  }

  pol.pruned_mass += next.f_upper.prune(pol.prune_eps);
  pol.pruned_mass += next.f_lower.prune(pol.prune_eps);
  const int deg = std::max(next.f_upper.max_degree(), next.f_lower.max_degree());
  if (deg > pol.deg_max)
    throw std::runtime_error("recurrence order " + std::to_string(next.order) +
                             ": polynomial degree " + std::to_string(deg) +
                             " exceeds deg_max " + std::to_string(pol.deg_max) +
                             " after pruning");
  return next;
}

}  // namespace detail

// One application of the PLUS-chain recurrence (A_j, B_j) -> (A_{j+1}, B_{j+1}).
inline ParityComponent step_positive(const ParityComponent& comp, const ModelParams& prm,
                                     TruncationPolicy& pol) {
  if (comp.label.chain != Chain::PLUS)
    throw std::invalid_argument("step_positive: component is not on the PLUS chain");
  return detail::step_chain(comp, prm, pol);
}

// One application of the MINUS-chain recurrence (C_j, D_j) -> (C_{j+1}, D_{j+1}).
inline ParityComponent step_negative(const ParityComponent& comp, const ModelParams& prm,
                                     TruncationPolicy& pol) {
  if (comp.label.chain != Chain::MINUS)
    throw std::invalid_argument("step_negative: component is not on the MINUS chain");
  return detail::step_chain(comp, prm, pol);
}

// Orders 0..j_max of the chain recurrence applied to an initial component,
// with an optional per-order trace.
inline std::vector<ParityComponent> h_power_sequence(const ParityComponent& initial,
                                                     const ModelParams& prm,
                                                     TruncationPolicy& pol, int j_max,
                                                     std::vector<OrderDiag>* trace = nullptr) {
  if (j_max < 0) throw std::invalid_argument("j_max: must be non-negative");
  std::vector<ParityComponent> seq;
  seq.reserve(j_max + 1);
  seq.push_back(initial);
  if (trace) trace->push_back(make_order_diag(initial, pol));
  for (int j = 1; j <= j_max; ++j) {
    try {
      seq.push_back(detail::step_chain(seq.back(), prm, pol));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("h_power_sequence failed at order " + std::to_string(j) +
                               ": " + e.what());
    }
    if (trace) trace->push_back(make_order_diag(seq.back(), pol));
  }
  return seq;
}

}  // namespace rabi
