#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rabi/coherent_calculus.hpp"
#include "rabi/fock_oracle.hpp"
#include "rabi/model.hpp"
#include "rabi/recurrence.hpp"

namespace rabi {

// Spectral-norm bound of the truncated Hamiltonian: diagonal max plus the
// off-diagonal row-sum bound.
inline double h_norm_estimate(const ModelParams& p, int n_max) {
  return std::abs(p.delta) / 2 + p.omega * n_max +
         2 * std::abs(p.lambda) * std::sqrt(n_max + 1.0);
}

struct EvolutionConfig {
  double t_final = 10.0;
  double dt = 0;  // <= 0: auto, 0.9/h_norm_estimate (remainder < 1e-8 at j_max = 10)
  int j_max = 10;
  int n_max = 64;
  TruncationPolicy policy;
  bool oracle_check = false;
  int record_every = 1;
  double norm_drift_ceiling = 1e-4;  // abort threshold on |norm^2 - initial|
  double remainder_tol = 1e-8;       // bound on (h dt)^{j_max+1}/(j_max+1)!

  // Per-step series remainder bound for the given model.
  double remainder_bound(const ModelParams& p) const {
    const double x = h_norm_estimate(p, n_max) * dt;
    double r = 1;
    for (int j = 1; j <= j_max + 1; ++j) {
      r *= x / j;
      if (r > 1e280) return std::numeric_limits<double>::infinity();
    }
    return r;
  }

  void validate(const ModelParams& p) const {
    if (!(t_final >= 0)) throw std::invalid_argument("t_final: must be non-negative");
    if (!(dt > 0)) throw std::invalid_argument("dt: must be positive");
    if (j_max < 2) throw std::invalid_argument("j_max: must be >= 2");
    if (n_max < 1) throw std::invalid_argument("n_max: must be >= 1");
    if (record_every < 1) throw std::invalid_argument("record_every: must be >= 1");
    policy.validate();
    if (t_final > 0 && remainder_bound(p) > remainder_tol)
      throw std::invalid_argument(
          "dt: series remainder bound (h_norm*dt)^(j_max+1)/(j_max+1)! = " +
          std::to_string(remainder_bound(p)) + " exceeds remainder_tol");
  }

  // Fill dt when unset and snap it so an integer number of steps lands on t_final.
  EvolutionConfig resolved(const ModelParams& p) const {
    EvolutionConfig c = *this;
    if (c.t_final > 0) {
      double step = c.dt > 0 ? c.dt : 0.9 / h_norm_estimate(p, c.n_max);
      const long n = std::max(1L, std::lround(std::ceil(c.t_final / step - 1e-12)));
      c.dt = c.t_final / static_cast<double>(n);
    } else if (c.dt <= 0) {
      c.dt = 0.9 / h_norm_estimate(p, c.n_max);
    }
    return c;
  }
};

// Parity decomposition of a Fock-basis state into order-0 components: the
// Gaussian-polynomial route, amplitude_n -> zbar^n e^{-|z|^2}/(2 pi sqrt(n!)) on
// the chain and side selected by (spin, parity of n).
inline std::pair<ParityComponent, ParityComponent> decompose_initial(
    const SpinorFockState& state) {
  detail::check_degree_range(state.n_max);
  ParityComponent plus, minus;
  plus.label = label_of(Chain::PLUS);
  minus.label = label_of(Chain::MINUS);
  const auto& sf = detail::sqrt_factorials();
  for (int n = 0; n <= state.n_max; ++n) {
    const double d = 1.0 / (2 * std::numbers::pi * sf[n]);
    const bool odd = (n % 2 == 1);
    if (state.up[n] != Complex(0))
      (odd ? plus.f_upper : minus.f_upper).add_poly(0, n, state.up[n] * d);
    if (state.down[n] != Complex(0))
      (odd ? minus.f_lower : plus.f_lower).add_poly(0, n, state.down[n] * d);
  }
  return {std::move(plus), std::move(minus)};
}

// Point-mass route for a coherent initial state
//   up_amp |alpha>_norm (x) |up> + down_amp |alpha>_norm (x) |down>,
// |alpha>_norm = e^{-|alpha|^2/2} e^{alpha a^dag}|0>: each chain side holds the
// pair (delta_{+alpha} -/+ delta_{-alpha})/4 matching its combination parity
// (antisymmetric weights for ODD sides, symmetric for EVEN).
inline std::pair<ParityComponent, ParityComponent> decompose_coherent(Complex alpha,
                                                                      Complex up_amp,
                                                                      Complex down_amp) {
  ParityComponent plus, minus;
  plus.label = label_of(Chain::PLUS);
  minus.label = label_of(Chain::MINUS);
  const Complex w = std::exp(-std::norm(alpha) / 2) / 4.0;
  auto fill = [&](CoefficientFunction& f, Complex amp, bool odd_side) {
    if (amp == Complex(0)) return;
    f.add_delta(alpha, amp * w);
    f.add_delta(-alpha, (odd_side ? -1.0 : 1.0) * amp * w);
  };
  fill(plus.f_upper, up_amp, true);    // (up, odd) side
  fill(minus.f_upper, up_amp, false);  // (up, even)
  fill(plus.f_lower, down_amp, false); // (down, even)
  fill(minus.f_lower, down_amp, true); // (down, odd)
  return {std::move(plus), std::move(minus)};
}

// Fock amplitudes of the normalized coherent state e^{-|a|^2/2} e^{a a^dag}|0>.
inline Eigen::VectorXcd coherent_amplitudes(Complex alpha, int n_max) {
  detail::check_degree_range(n_max);
  Eigen::VectorXcd v(n_max + 1);
  const double norm = std::exp(-std::norm(alpha) / 2);
  Complex an = 1;
  const auto& sf = detail::sqrt_factorials();
  for (int n = 0; n <= n_max; ++n) {
    v[n] = norm * an / sf[n];
    an *= alpha;
  }
  return v;
}

inline SpinorFockState reconstruct_state(const ParityComponent& plus,
                                         const ParityComponent& minus, int n_max) {
  return reconstruct_component(plus, n_max) + reconstruct_component(minus, n_max);
}

// One restarted Taylor step: sum_{j=0}^{j_max} (-i dt)^j / j! of the per-chain
// recurrence orders, reconstructed on the Fock grid. No renormalization; norm
// drift is a monitored error signal. Components must carry order 0.
inline SpinorFockState taylor_step(const ParityComponent& plus, const ParityComponent& minus,
                                   const ModelParams& prm, const EvolutionConfig& cfg,
                                   TruncationPolicy* pol = nullptr,
                                   std::vector<OrderDiag>* trace = nullptr) {
  if (plus.order != 0 || minus.order != 0)
    throw std::invalid_argument("taylor_step: components must carry order 0");
  TruncationPolicy local = cfg.policy;
  TruncationPolicy& p = pol ? *pol : local;
  SpinorFockState out(cfg.n_max);
  for (const ParityComponent* comp : {&plus, &minus}) {
    ParityComponent cur = *comp;
    Complex coef = 1;
    out = out + coef * reconstruct_component(cur, cfg.n_max);
    if (trace) trace->push_back(make_order_diag(cur, p));
    for (int j = 1; j <= cfg.j_max; ++j) {
      cur = detail::step_chain(cur, prm, p);
      coef *= Complex(0, -cfg.dt) / static_cast<double>(j);
      out = out + coef * reconstruct_component(cur, cfg.n_max);
      if (trace) trace->push_back(make_order_diag(cur, p));
    }
  }
  return out;
}

struct StepDiag {
  int step = 0;
  double t = 0;
  double pruned_mass_total = 0;  // policy accumulation up to this step
  std::vector<OrderDiag> orders; // filled only when order tracing is enabled
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpinorFockState> states;
  std::vector<double> norms;                // norm^2 per recorded sample
  std::vector<double> parity_expectations;  // <P> per recorded sample
  std::vector<StepDiag> diagnostics;        // per recorded sample
  std::vector<double> oracle_residuals;     // ||state - exact||, when oracle_check
  double total_pruned_mass = 0;
};

inline double parity_expectation_of(const SpinorFockState& s) {
  double v = 0;
  for (int n = 0; n <= s.n_max; ++n) {
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    v += sgn * (std::norm(s.up[n]) - std::norm(s.down[n]));
  }
  return v;
}

// Full restarted evolution: repeat [decompose -> taylor_step], re-decomposing the
// reconstructed Fock state every step, recording every record_every steps (plus
// t = 0 and the final step). Aborts when |norm^2 - norm^2(0)| exceeds the ceiling.
inline Trajectory evolve(const SpinorFockState& initial, const ModelParams& prm,
                         const EvolutionConfig& cfg_in, bool collect_order_trace = false) {
  prm.validate();
  const EvolutionConfig cfg = cfg_in.resolved(prm);
  if (cfg.t_final > 0) cfg.validate(prm);
  if (initial.n_max != cfg.n_max)
    throw std::invalid_argument("evolve: initial state n_max differs from cfg.n_max");

  Trajectory traj;
  TruncationPolicy pol = cfg.policy;
  std::optional<ExactPropagator> oracle;
  if (cfg.oracle_check) oracle.emplace(prm, cfg.n_max);

  const double norm2_0 = initial.norm2();
  SpinorFockState state = initial;
  double t = 0;

  auto record = [&](int step, const std::vector<OrderDiag>* orders) {
    traj.times.push_back(t);
    traj.states.push_back(state);
    traj.norms.push_back(state.norm2());
    traj.parity_expectations.push_back(parity_expectation_of(state));
    StepDiag d;
    d.step = step;
    d.t = t;
    d.pruned_mass_total = pol.pruned_mass;
    if (orders) d.orders = *orders;
    traj.diagnostics.push_back(std::move(d));
    if (oracle) {
      const SpinorFockState exact = oracle->evolve(initial, t);
      traj.oracle_residuals.push_back((state - exact).full_vector().norm());
    }
  };

  record(0, nullptr);
  const long n_steps =
      cfg.t_final > 0 ? std::lround(std::round(cfg.t_final / cfg.dt)) : 0;
  std::vector<OrderDiag> order_trace;
  for (long step = 1; step <= n_steps; ++step) {
    auto [plus, minus] = decompose_initial(state);
    order_trace.clear();
    state = taylor_step(plus, minus, prm, cfg, &pol,
                        collect_order_trace ? &order_trace : nullptr);
    t = static_cast<double>(step) * cfg.dt;
    const double drift = std::abs(state.norm2() - norm2_0);
    if (drift > cfg.norm_drift_ceiling)
      throw std::runtime_error(
          "evolve: norm drift " + std::to_string(drift) + " at t = " + std::to_string(t) +
          " exceeds ceiling " + std::to_string(cfg.norm_drift_ceiling) +
          " (dt/j_max/n_max inadequate)");
    if (step % cfg.record_every == 0 || step == n_steps)
      record(static_cast<int>(step), collect_order_trace ? &order_trace : nullptr);
  }
  traj.total_pruned_mass = pol.pruned_mass;
  return traj;
}

}  // namespace rabi
