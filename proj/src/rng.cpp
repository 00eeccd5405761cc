#include "vanhove/rng.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/QR>

namespace vanhove {

std::uint64_t CounterRng::mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() noexcept {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

complex CounterRng::complex_normal() noexcept {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

namespace {

ComplexMatrix gaussian_matrix(CounterRng& rng, Eigen::Index n) {
  ComplexMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.complex_normal();
  return a;
}

}  // namespace

ComplexMatrix random_density_matrix(CounterRng& rng, Eigen::Index n) {
  const ComplexMatrix a = gaussian_matrix(rng, n);
  ComplexMatrix rho = a * a.adjoint();
  rho = 0.5 * (rho + ComplexMatrix(rho.adjoint()));
  return rho / rho.trace().real();
}

ComplexMatrix random_hermitian(CounterRng& rng, Eigen::Index n) {
  const ComplexMatrix a = gaussian_matrix(rng, n);
  return 0.5 * (a + ComplexMatrix(a.adjoint()));
}

ComplexMatrix random_unitary(CounterRng& rng, Eigen::Index n) {
  const Eigen::MatrixXcd a = gaussian_matrix(rng, n);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const complex d = r(k, k);
    if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

}  // namespace vanhove
