#pragma once

// Umbrella header: quantum Rabi model dynamics via parity-split coherent-state
// coefficient functions (recurrence-generated Taylor series) plus an independent
// truncated-Fock-basis oracle.

#include "rabi/model.hpp"
#include "rabi/fock_oracle.hpp"
#include "rabi/coherent_calculus.hpp"
#include "rabi/recurrence.hpp"
#include "rabi/evolution.hpp"
#include "rabi/observables.hpp"
#include "rabi/cli_io.hpp"
