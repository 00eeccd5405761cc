#pragma once

#include <cmath>
#include <vector>

#include "vanhove/kernels.hpp"
#include "vanhove/rng.hpp"

namespace fixtures {

using vanhove::complex;
using vanhove::ComplexMatrix;

inline std::vector<double> gaussian(const vanhove::EnergyGrid& g, double mu, double sigma) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::exp(-0.5 * std::pow((g.point(i) - mu) / sigma, 2));
  return v;
}

inline ComplexMatrix outer(const std::vector<double>& f, double amp) {
  const auto n = static_cast<Eigen::Index>(f.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = amp * f[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(j)];
  return m;
}

inline vanhove::SingularKernel normalized(const vanhove::GridPtr& grid, const std::vector<double>& f) {
  double mass = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) mass += grid->weight(i) * f[i];
  std::vector<complex> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i] / mass;
  return vanhove::SingularKernel(grid, std::move(v));
}

// Normalized Gaussian diagonal with Gaussian coherences of the given amplitude.
inline vanhove::StateFunctional gaussian_state(const vanhove::GridPtr& grid, double mu = 5.0, double sigma = 0.5,
                                               double coherence = 0.2) {
  const auto g = gaussian(*grid, mu, sigma);
  return vanhove::StateFunctional(normalized(grid, g), vanhove::RegularKernel(grid, outer(g, coherence)));
}

// O(w) = w plus Gaussian regular part.
inline vanhove::Observable gaussian_observable(const vanhove::GridPtr& grid, double mu = 5.0, double sigma = 0.5) {
  std::vector<complex> s(grid->size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = grid->point(i);
  return vanhove::Observable(vanhove::SingularKernel(grid, std::move(s)),
                             vanhove::RegularKernel(grid, outer(gaussian(*grid, mu, sigma), 1.0)));
}

inline vanhove::StateFunctional random_state(const vanhove::GridPtr& grid, vanhove::CounterRng& rng,
                                             double coherence = 0.1) {
  std::vector<double> f(grid->size());
  for (auto& x : f) x = rng.uniform();
  return vanhove::StateFunctional(
      normalized(grid, f),
      vanhove::RegularKernel(grid, vanhove::random_hermitian(rng, static_cast<Eigen::Index>(grid->size())) * coherence));
}

inline vanhove::Observable random_observable(const vanhove::GridPtr& grid, vanhove::CounterRng& rng) {
  std::vector<complex> s(grid->size());
  for (auto& x : s) x = rng.normal();
  return vanhove::Observable(
      vanhove::SingularKernel(grid, std::move(s)),
      vanhove::RegularKernel(grid, vanhove::random_hermitian(rng, static_cast<Eigen::Index>(grid->size()))));
}

}  // namespace fixtures
