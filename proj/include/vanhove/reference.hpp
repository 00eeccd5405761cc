#pragma once

#include "vanhove/kernels.hpp"
#include "vanhove/wigner.hpp"

// Straightforward serial versions of the hot kernels. They share no code
// with the optimized paths and exist for cross-checks and benchmarks.
namespace vanhove::reference {

complex pair(const StateFunctional& state, const Observable& obs);

StateFunctional evolve(const StateFunctional& state, double t);

// pair(evolve(state, t), obs) with one phase per matrix entry.
complex expectation(const StateFunctional& state, const Observable& obs, double t);

// Every shell contributes to every node; no tail cutoff.
ClassicalDensity classical_state_density(const SingularKernel& rho, const PhaseField& hfield,
                                         const MollifierPolicy& policy);

}  // namespace vanhove::reference
