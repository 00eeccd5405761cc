#include "vanhove/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vanhove/errors.hpp"
#include "vanhove/parallel.hpp"

namespace vanhove {

EnergyGrid::EnergyGrid(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  require(points_.size() >= 2, ErrorCode::invalid_argument, "energy grid needs at least 2 points");
  require(points_.size() == weights_.size(), ErrorCode::invalid_argument,
          "energy grid points/weights length mismatch");
  require(points_.front() >= 0.0, ErrorCode::invalid_argument, "energy grid must start at omega >= 0");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    require(std::isfinite(points_[i]) && std::isfinite(weights_[i]), ErrorCode::invalid_argument,
            "energy grid entries must be finite");
    require(weights_[i] > 0.0, ErrorCode::invalid_argument, "energy grid weights must be positive");
    if (i > 0)
      require(points_[i] > points_[i - 1], ErrorCode::invalid_argument,
              "energy grid points must be strictly increasing");
  }
  const double span = points_.back() - points_.front();
  const double total = pairwise_sum<double>(weights_);
  if (std::abs(total - span) > 1e-12 * span) {
    std::ostringstream msg;
    msg << "weights sum to " << total << ", expected " << span;
    fail(ErrorCode::invalid_argument, msg.str());
  }
}

double EnergyGrid::max_spacing() const noexcept {
  double gap = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) gap = std::max(gap, points_[i] - points_[i - 1]);
  return gap;
}

double EnergyGrid::min_spacing() const noexcept {
  double gap = points_.back() - points_.front();
  for (std::size_t i = 1; i < points_.size(); ++i) gap = std::min(gap, points_[i] - points_[i - 1]);
  return gap;
}

std::size_t EnergyGrid::nearest(double omega) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), omega);
  if (it == points_.begin()) return 0;
  if (it == points_.end()) return points_.size() - 1;
  const auto hi = static_cast<std::size_t>(it - points_.begin());
  return (omega - points_[hi - 1] <= points_[hi] - omega) ? hi - 1 : hi;
}

namespace {

void trapezoid(double omega_max, std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  const double h = omega_max / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (i + 1 == n) ? omega_max : h * static_cast<double>(i);
    w[i] = h;
  }
  w.front() = w.back() = 0.5 * h;
}

// Clenshaw-Curtis on the extreme Chebyshev points, mapped from [-1,1] to
// [0, omega_max] and listed in increasing order.
void clenshaw_curtis(double omega_max, std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  const std::size_t N = n - 1;
  const double pi = std::numbers::pi;
  for (std::size_t k = 0; k <= N; ++k) {
    const double theta = pi * static_cast<double>(k) / static_cast<double>(N);
    x[k] = 0.5 * omega_max * (1.0 - std::cos(theta));
    double s = 0.0;
    for (std::size_t j = 1; 2 * j <= N; ++j) {
      const double b = (2 * j == N) ? 1.0 : 2.0;
      s += b / (4.0 * static_cast<double>(j * j) - 1.0) * std::cos(2.0 * static_cast<double>(j) * theta);
    }
    const double c = (k == 0 || k == N) ? 1.0 : 2.0;
    w[k] = 0.5 * omega_max * c / static_cast<double>(N) * (1.0 - s);
  }
  x.front() = 0.0;
  x.back() = omega_max;
}

}  // namespace

GridPtr make_grid(double omega_max, std::size_t n, QuadratureScheme scheme) {
  require(std::isfinite(omega_max) && omega_max > 0.0, ErrorCode::invalid_argument,
          "omega_max must be positive");
  require(n >= 2, ErrorCode::invalid_argument, "grid needs n >= 2");
  std::vector<double> x(n), w(n);
  if (scheme == QuadratureScheme::uniform)
    trapezoid(omega_max, n, x, w);
  else
    clenshaw_curtis(omega_max, n, x, w);
  return std::make_shared<const EnergyGrid>(std::move(x), std::move(w));
}

double recurrence_time(const EnergyGrid& grid) {
  return 2.0 * std::numbers::pi / grid.max_spacing();
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b) return false;
  return a == b || *a == *b;
}

}  // namespace vanhove
