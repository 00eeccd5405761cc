#include "vanhove/reference.hpp"

#include <cmath>
#include <numbers>

#include "vanhove/errors.hpp"

namespace vanhove::reference {

complex pair(const StateFunctional& state, const Observable& obs) {
  require_same_grid(state.grid(), obs.grid());
  const EnergyGrid& g = *state.grid();
  const std::size_t n = g.size();
  complex acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += g.weight(i) * state.singular()[i] * obs.singular()[i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      acc += g.weight(i) * g.weight(j) * state.regular()(i, j) * obs.regular()(j, i);
  return acc;
}

StateFunctional evolve(const StateFunctional& state, double t) {
  require(std::isfinite(t), ErrorCode::invalid_argument, "evolution time must be finite");
  const EnergyGrid& g = *state.grid();
  ComplexMatrix m = state.regular().values();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) *= std::polar(1.0, -(g.point(static_cast<std::size_t>(i)) - g.point(static_cast<std::size_t>(j))) * t);
  return StateFunctional(state.singular(), RegularKernel(state.grid(), std::move(m)));
}

complex expectation(const StateFunctional& state, const Observable& obs, double t) {
  return reference::pair(reference::evolve(state, t), obs);
}

ClassicalDensity classical_state_density(const SingularKernel& rho, const PhaseField& hfield,
                                         const MollifierPolicy& policy) {
  const EnergyGrid& g = *rho.grid();
  const double eps = policy.epsilon;
  const EnergyBins bins(hfield, 0.5 * eps);
  const double norm = 1.0 / (eps * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> total(hfield.values().size(), 0.0);
  double leakage = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double c = g.weight(i) * rho[i].real();
    if (c == 0.0) continue;
    const double omega = g.point(i);
    if (omega < hfield.min() || omega > hfield.max()) {
      leakage += c;
      continue;
    }
    std::vector<double> shell(total.size());
    for (std::size_t k = 0; k < shell.size(); ++k) {
      const double z = (hfield.values()[k] - omega) / eps;
      shell[k] = norm * std::exp(-0.5 * z * z);
    }
    const double mass = bins.integrate(PhaseField(hfield.grid(), shell));
    for (std::size_t k = 0; k < shell.size(); ++k) total[k] += c * shell[k] / mass;
  }
  return ClassicalDensity{PhaseField(hfield.grid(), std::move(total)), hfield, eps, leakage};
}

}  // namespace vanhove::reference
