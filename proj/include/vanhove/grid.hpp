#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace vanhove {

enum class QuadratureScheme { uniform, chebyshev };

/// Discretized energy continuum [omega_min, omega_max] with quadrature weights.
///
/// Points are strictly increasing and the weights integrate constants exactly:
/// sum(w) == omega_max - omega_min to 1e-12 relative. The constructor enforces
/// this, so every EnergyGrid in circulation is valid.
class EnergyGrid {
 public:
  EnergyGrid(std::vector<double> points, std::vector<double> weights);

  std::size_t size() const noexcept { return points_.size(); }
  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  double omega_min() const noexcept { return points_.front(); }
  double omega_max() const noexcept { return points_.back(); }

  // Largest gap between neighbouring points; for a uniform grid this is the
  // spacing that sets the recurrence time 2*pi/spacing.
  double max_spacing() const noexcept;
  double min_spacing() const noexcept;

  // Index of the grid point nearest to omega (clamped to the grid).
  std::size_t nearest(double omega) const;

  bool operator==(const EnergyGrid& other) const = default;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const EnergyGrid>;

// Trapezoid (uniform) or Clenshaw-Curtis (chebyshev) grid on [0, omega_max].
GridPtr make_grid(double omega_max, std::size_t n, QuadratureScheme scheme);

// Shortest period after which the discretized phases all realign.
double recurrence_time(const EnergyGrid& grid);

bool same_grid(const GridPtr& a, const GridPtr& b);

}  // namespace vanhove
