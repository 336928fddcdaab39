#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "rabi/evolution.hpp"
#include "rabi/model.hpp"

namespace rabi {

// Expectations are reported unnormalized, next to norm2, so norm drift stays
// visible in raw output; consumers divide if they want normalized values.
struct ObservableRecord {
  double t = 0;
  double norm2 = 0;
  double sigma_z = 0;
  double sigma_x = 0;
  double photon_n = 0;
  double parity = 0;
  double fidelity_initial = 0;  // |<reference|state>|^2 with unnormalized vectors
  std::optional<double> oracle_residual;
};

inline ObservableRecord expect_all(const SpinorFockState& state,
                                   const SpinorFockState& reference, double t = 0) {
  if (state.n_max != reference.n_max)
    throw std::invalid_argument("expect_all: n_max mismatch between state and reference");
  ObservableRecord r;
  r.t = t;
  r.norm2 = state.norm2();
  Complex overlap = 0;
  for (int n = 0; n <= state.n_max; ++n) {
    const double pu = std::norm(state.up[n]);
    const double pd = std::norm(state.down[n]);
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    r.sigma_z += pu - pd;
    r.sigma_x += 2 * std::real(std::conj(state.up[n]) * state.down[n]);
    r.photon_n += n * (pu + pd);
    r.parity += sgn * (pu - pd);
    overlap += std::conj(reference.up[n]) * state.up[n] +
               std::conj(reference.down[n]) * state.down[n];
  }
  r.fidelity_initial = std::norm(overlap);
  return r;
}

}  // namespace rabi
