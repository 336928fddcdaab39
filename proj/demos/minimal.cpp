// Minimal library walkthrough: verify the recurrence engine against the dense
// oracle for a few powers of H, then evolve a short quench and print observables.

#include <cstdio>

#include "rabi/rabi.hpp"

int main() {
  using namespace rabi;

  const ModelParams params{1.0, 1.0, 0.5};

  // H^j in coefficient space vs dense matrix powers, coherent alpha = 1 spin-up.
  auto [plus, minus] = decompose_coherent(1.0, 1.0, 0.0);
  TruncationPolicy pol;
  const int n_max = 48;
  SpinorFockState ref(n_max);
  ref.up = coherent_amplitudes(1.0, n_max);
  const auto h = build_hamiltonian(params, n_max);
  auto seq_p = h_power_sequence(plus, params, pol, 4);
  auto seq_m = h_power_sequence(minus, params, pol, 4);
  std::printf("H^j coefficient-space vs dense oracle (coherent alpha=1, spin up):\n");
  for (int j = 0; j <= 4; ++j) {
    const SpinorFockState rec =
        reconstruct_component(seq_p[j], n_max) + reconstruct_component(seq_m[j], n_max);
    const SpinorFockState exact = apply_h_power(h, ref, j);
    const double rel = (rec - exact).full_vector().norm() / exact.full_vector().norm();
    std::printf("  j=%d  relative error %.3e\n", j, rel);
  }

  // Short quench from |0, up> in the ultrastrong regime.
  EvolutionConfig cfg;
  cfg.t_final = 5.0;
  cfg.n_max = 32;
  cfg.record_every = 25;
  cfg.oracle_check = true;
  ModelParams ultra{1.0, 1.0, 0.1};
  SpinorFockState initial(cfg.n_max);
  initial.up[0] = 1.0;
  const Trajectory traj = evolve(initial, ultra, cfg);
  std::printf("\nquench |0,up>, g=0.1:  t     <sigma_z>   <n>        residual\n");
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const ObservableRecord r = expect_all(traj.states[i], initial, traj.times[i]);
    std::printf("  %21.3f  %+.6f  %.6f  %.2e\n", r.t, r.sigma_z, r.photon_n,
                traj.oracle_residuals[i]);
  }
  return 0;
}
