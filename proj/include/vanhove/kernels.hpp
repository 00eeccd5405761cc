#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vanhove/grid.hpp"

namespace vanhove {

using complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Diagonal channel f(omega) of a kernel f(omega) delta(omega - omega').
///
/// Kept apart from the regular part so that the delta never has to be
/// represented numerically.
class SingularKernel {
 public:
  SingularKernel(GridPtr grid, std::vector<complex> values);
  static SingularKernel zero(GridPtr grid);

  const GridPtr& grid() const noexcept { return grid_; }
  const std::vector<complex>& values() const noexcept { return values_; }
  complex operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  GridPtr grid_;
  std::vector<complex> values_;
};

/// Smooth two-variable channel f(omega_i, omega'_j) sampled on grid x grid.
class RegularKernel {
 public:
  RegularKernel(GridPtr grid, ComplexMatrix values);
  static RegularKernel zero(GridPtr grid);

  const GridPtr& grid() const noexcept { return grid_; }
  const ComplexMatrix& values() const noexcept { return values_; }
  complex operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  bool is_zero() const;

  // max |f(i,j) - conj(f(j,i))|
  double hermiticity_residual() const;

 private:
  GridPtr grid_;
  ComplexMatrix values_;
};

class Observable {
 public:
  // When self_adjoint is requested the kernels are checked (real singular
  // part, Hermitian regular part, both to 1e-12); violations throw.
  Observable(SingularKernel singular, RegularKernel regular, bool self_adjoint = true);

  const SingularKernel& singular() const noexcept { return singular_; }
  const RegularKernel& regular() const noexcept { return regular_; }
  const GridPtr& grid() const noexcept { return singular_.grid(); }
  bool self_adjoint() const noexcept { return self_adjoint_; }

 private:
  SingularKernel singular_;
  RegularKernel regular_;
  bool self_adjoint_;
};

/// State functional (rho| with diagonal density rho(omega) and coherences
/// rho(omega, omega'). Construction does not enforce physicality; use
/// validate_state for that.
class StateFunctional {
 public:
  StateFunctional(SingularKernel singular, RegularKernel regular);

  const SingularKernel& singular() const noexcept { return singular_; }
  const RegularKernel& regular() const noexcept { return regular_; }
  const GridPtr& grid() const noexcept { return singular_.grid(); }

 private:
  SingularKernel singular_;
  RegularKernel regular_;
};

// (rho|O) = sum_i w_i rho_i O_i + sum_ij w_i w_j rho(i,j) O(j,i)
complex pair(const StateFunctional& state, const Observable& obs);

// Real part of pair, checking |Im| < 1e-10 (scaled) when obs is self-adjoint.
double pair_real(const StateFunctional& state, const Observable& obs);

Observable identity_observable(const GridPtr& grid);
Observable hamiltonian_observable(const GridPtr& grid);

struct Violation {
  std::string invariant;
  double residual = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  // Informational: e.g. kernel mass sitting at the omega_max cutoff.
  std::vector<Violation> warnings;
  bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate_state(const StateFunctional& state);

// sum_i w_i rho_i, i.e. (rho|I)
complex state_trace(const StateFunctional& state);

// Linear combinations, used by the bilinearity checks and by callers building
// mixtures. Both operands must share a grid.
StateFunctional combine(complex a, const StateFunctional& x, complex b, const StateFunctional& y);

void require_same_grid(const GridPtr& a, const GridPtr& b);

}  // namespace vanhove
