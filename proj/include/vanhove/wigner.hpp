#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "vanhove/kernels.hpp"

namespace vanhove {

/// Node-centred rectangular (q, p) grid; hbar = 1 so cell areas are actions.
class PhaseGrid {
 public:
  PhaseGrid(double q_min, double q_max, std::size_t nq, double p_min, double p_max, std::size_t np);

  std::size_t nq() const noexcept { return nq_; }
  std::size_t np() const noexcept { return np_; }
  std::size_t size() const noexcept { return nq_ * np_; }
  double q_min() const noexcept { return q_min_; }
  double q_max() const noexcept { return q_max_; }
  double p_min() const noexcept { return p_min_; }
  double p_max() const noexcept { return p_max_; }
  double dq() const noexcept { return (q_max_ - q_min_) / static_cast<double>(nq_ - 1); }
  double dp() const noexcept { return (p_max_ - p_min_) / static_cast<double>(np_ - 1); }
  double cell_area() const noexcept { return dq() * dp(); }
  double q(std::size_t i) const noexcept;
  double p(std::size_t j) const noexcept;
  // Row-major with p fastest.
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * np_ + j; }
  // Trapezoid weight of node (i, j) for phase-space integrals.
  double node_weight(std::size_t i, std::size_t j) const noexcept;

  bool operator==(const PhaseGrid&) const = default;

 private:
  double q_min_, q_max_, p_min_, p_max_;
  std::size_t nq_, np_;
};

class PhaseField {
 public:
  PhaseField(PhaseGrid grid, std::vector<double> values);

  const PhaseGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  double at(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  double min() const;
  double max() const;

  // Bilinear interpolation; points outside the window are clamped to it.
  double interpolate(double q, double p) const;

 private:
  PhaseGrid grid_;
  std::vector<double> values_;
};

PhaseField sample_field(const PhaseGrid& grid, const std::function<double(double, double)>& f);
PhaseField harmonic_hamiltonian(const PhaseGrid& grid, double mass = 1.0, double frequency = 1.0);
PhaseField free_hamiltonian(const PhaseGrid& grid, double mass = 1.0);
PhaseField coordinate_field(const PhaseGrid& grid);
PhaseField momentum_field(const PhaseGrid& grid);

// Trapezoid integral over the whole window.
double phase_space_mass(const PhaseField& field);

/// Gaussian surrogate for the Dirac deltas; epsilon is an energy width.
struct MollifierPolicy {
  double epsilon = 0.0;
};

// median |grad H| * max(dq, dp): the energy change across one cell.
double energy_resolution(const PhaseField& hfield);
// epsilon = 5 * median |grad H| * cell diagonal.
MollifierPolicy default_mollifier(const PhaseField& hfield);

/// Bins the grid nodes by the value of an energy-like field.
///
/// This implements integration "over H only": a field is averaged over the
/// nodes of each bin (trapezoid-weighted) and the averages are integrated
/// against dH. Empty bins take values interpolated from their neighbours.
class EnergyBins {
 public:
  EnergyBins(const PhaseField& energy, double width);

  std::size_t size() const noexcept { return widths_.size(); }
  double lower() const noexcept { return lower_; }
  double width() const noexcept { return width_; }
  double upper() const noexcept { return upper_; }
  std::size_t bin_of_node(std::size_t node) const { return node_bin_[node]; }
  std::size_t bin_of_value(double h) const;

  std::vector<double> averages(const PhaseField& field) const;
  double integrate(const PhaseField& field) const;
  double integrate_product(const PhaseField& a, const PhaseField& b) const;
  double integrate_averages(std::span<const double> avg) const;

  const std::vector<std::size_t>& nodes_in_bin(std::size_t b) const { return members_[b]; }

 private:
  PhaseGrid grid_;
  double lower_, upper_, width_;
  std::vector<double> widths_;
  std::vector<std::size_t> node_bin_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<double> bin_weight_;
};

/// Nonnegative phase-space density together with the energy field along which
/// it is normalized.
struct ClassicalDensity {
  PhaseField field;
  PhaseField energy;
  double mollifier_width = 0.0;
  // Probability mass dropped because its energy lay outside the window.
  double leakage = 0.0;
};

// O(H(q,p)) by linear interpolation on the energy grid; zero outside
// [omega_min, omega_max]. Throws domain-mismatch if no node lands inside.
PhaseField wigner_singular(const SingularKernel& obs_singular, const PhaseField& hfield);

// exp(-(H - omega0)^2 / 2 eps^2), normalized to unit integral over H.
ClassicalDensity shell_density(double omega0, const PhaseField& hfield, const MollifierPolicy& policy);

// sum_i w_i rho_i shell_density(omega_i); shells outside the window go to leakage.
ClassicalDensity classical_state_density(const SingularKernel& rho, const PhaseField& hfield,
                                         const MollifierPolicy& policy);

// Energy-space integral of rho * O via the H bins of the density.
double classical_expectation(const ClassicalDensity& rho, const PhaseField& obs);

enum class DensityNormalization {
  energy_binned,  // integrate over the first field only (functions of invariants)
  phase_space,    // ordinary integral over q and p (localized densities)
};

// prod_i N(L_i; l_i, eps) with unit-area Gaussians N, before any renormalization.
PhaseField mollified_product(std::span<const double> l_values, std::span<const PhaseField> fields,
                             const MollifierPolicy& policy);

// Mass of a raw product under the chosen normalization rule.
double product_mass(const PhaseField& raw, const PhaseField& first_field, double epsilon,
                    DensityNormalization rule);

// Renormalized product; throws degenerate-support when the raw mass is below 1e-6.
ClassicalDensity multi_invariant_density(std::span<const double> l_values, std::span<const PhaseField> fields,
                                         const MollifierPolicy& policy,
                                         DensityNormalization rule = DensityNormalization::energy_binned);

// max |{H, rho}| over interior nodes (central differences), divided by
// max |grad H| |grad rho|. Zero for a constant density.
double liouville_residual(const PhaseField& density, const PhaseField& hfield);
double liouville_residual(const ClassicalDensity& density, const PhaseField& hfield);

// Header q,p,value; rows in grid order.
void write_phase_csv(std::ostream& out, const PhaseField& field);

// 32-byte little-endian header: "WPF1", u32 nq, u32 np, f32 q_min, q_max,
// p_min, p_max, u32 reserved (0); then nq*np float64 values, row-major.
void write_phase_binary(const std::filesystem::path& path, const PhaseField& field);
PhaseField read_phase_binary(const std::filesystem::path& path);

}  // namespace vanhove
