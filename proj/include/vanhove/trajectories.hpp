#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vanhove/pointer_basis.hpp"
#include "vanhove/wigner.hpp"

namespace vanhove {

/// Phase-space image L^W of one constant of motion, and where its value l
/// comes from for a pointer vector (omega, [l]).
struct InvariantField {
  enum class Source {
    energy,  // l = omega
    label,   // l = sum_k |U(k, l)|^2 * labels[k].values[coordinate]
  };
  PhaseField field;
  Source source = Source::energy;
  std::size_t coordinate = 0;
};

struct TrajectoryEntry {
  double omega = 0.0;
  std::size_t l_index = 0;
  std::vector<double> l_values;
  double a0 = 0.0;
  double probability = 0.0;
  // Set when the invariant level sets miss the grid; the entry then carries
  // its probability but contributes nothing to the density.
  bool degenerate = false;
  std::string note;
  // Fraction of the component's mass with |q - a0| <= 3 eps and
  // |L_i - l_i| <= 3 eps for every i.
  double concentration = 0.0;
};

struct TrajectoryEnsemble {
  std::vector<TrajectoryEntry> entries;
  double total_probability() const;
};

struct TrajectoryResult {
  TrajectoryEnsemble ensemble;
  // Probability-weighted sum of the non-degenerate components.
  ClassicalDensity density;
  // Unit-mass component densities, one per entry (zero for degenerate ones).
  std::vector<PhaseField> components;
};

// Component (omega, [l], a0) is N(q - a0) prod_i N(L_i - l_i), normalized
// to unit phase-space mass; its weight is w(omega) rho(omega, [l]) / #a0.
TrajectoryResult trajectory_ensemble(const std::vector<PointerBasis>& pointer,
                                     const std::vector<InvariantField>& invariants, const MollifierPolicy& policy,
                                     std::span<const double> a0_points);

// Transports a density along the flow of H for time eta by pulling each node
// back along the characteristics (RK4 on the interpolated gradient of H).
PhaseField transport(const PhaseField& density, const PhaseField& hfield, double eta, std::size_t steps = 64);

struct RidgeFit {
  std::vector<double> eta;
  std::vector<double> q;  // argmax of the q-marginal, parabolically refined
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Follows the peak of a transported component and fits q = slope * eta + intercept.
RidgeFit fit_ridge(const PhaseField& component, const PhaseField& hfield, std::span<const double> etas,
                   std::size_t steps = 64);

// Header component,l_values,a0,probability; l_values joined with ';'.
void write_ensemble_csv(std::ostream& out, const TrajectoryEnsemble& ensemble);

}  // namespace vanhove
