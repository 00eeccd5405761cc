#include "vanhove/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vanhove/errors.hpp"
#include "vanhove/parallel.hpp"

namespace vanhove {

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  require(same_grid(a, b), ErrorCode::incompatible_grids, "kernels live on different energy grids");
}

SingularKernel::SingularKernel(GridPtr grid, std::vector<complex> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, ErrorCode::invalid_argument, "singular kernel needs a grid");
  require(values_.size() == grid_->size(), ErrorCode::invalid_argument,
          "singular kernel length must equal grid size");
}

SingularKernel SingularKernel::zero(GridPtr grid) {
  const auto n = grid->size();
  return SingularKernel(std::move(grid), std::vector<complex>(n));
}

RegularKernel::RegularKernel(GridPtr grid, ComplexMatrix values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, ErrorCode::invalid_argument, "regular kernel needs a grid");
  const auto n = static_cast<Eigen::Index>(grid_->size());
  require(values_.rows() == n && values_.cols() == n, ErrorCode::invalid_argument,
          "regular kernel must be n x n");
  require(values_.allFinite(), ErrorCode::invalid_argument, "regular kernel has non-finite entries");
}

RegularKernel RegularKernel::zero(GridPtr grid) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return RegularKernel(std::move(grid), ComplexMatrix::Zero(n, n));
}

bool RegularKernel::is_zero() const { return (values_.array() == complex{}).all(); }

double RegularKernel::hermiticity_residual() const {
  const auto n = values_.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      worst = std::max(worst, std::abs(values_(i, j) - std::conj(values_(j, i))));
  return worst;
}

Observable::Observable(SingularKernel singular, RegularKernel regular, bool self_adjoint)
    : singular_(std::move(singular)), regular_(std::move(regular)), self_adjoint_(self_adjoint) {
  require_same_grid(singular_.grid(), regular_.grid());
  if (!self_adjoint_) return;
  for (const complex& v : singular_.values())
    require(std::abs(v.imag()) <= 1e-12, ErrorCode::invalid_argument,
            "self-adjoint observable needs a real singular part");
  require(regular_.hermiticity_residual() <= 1e-12, ErrorCode::invalid_argument,
          "self-adjoint observable needs a Hermitian regular part");
}

StateFunctional::StateFunctional(SingularKernel singular, RegularKernel regular)
    : singular_(std::move(singular)), regular_(std::move(regular)) {
  require_same_grid(singular_.grid(), regular_.grid());
}

complex pair(const StateFunctional& state, const Observable& obs) {
  require_same_grid(state.grid(), obs.grid());
  const EnergyGrid& g = *state.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto w = g.weights();
  const ComplexMatrix& rho = state.regular().values();
  const ComplexMatrix& op = obs.regular().values();

  const auto un = static_cast<std::size_t>(n);
  std::vector<complex> rows(un);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)] =
        w[static_cast<std::size_t>(i)] *
        pairwise_reduce<complex>(0, un, [&](std::size_t j) {
          return w[j] * rho(i, static_cast<Eigen::Index>(j)) * op(static_cast<Eigen::Index>(j), i);
        });
  }
  const complex singular = pairwise_reduce<complex>(
      0, un, [&](std::size_t i) { return w[i] * state.singular()[i] * obs.singular()[i]; });
  return singular + pairwise_sum<complex>(rows);
}

double pair_real(const StateFunctional& state, const Observable& obs) {
  const complex value = pair(state, obs);
  if (obs.self_adjoint() && std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real()))) {
    std::ostringstream msg;
    msg << "pairing has imaginary part " << value.imag() << "; is the state Hermitian?";
    fail(ErrorCode::numerical, msg.str());
  }
  return value.real();
}

Observable identity_observable(const GridPtr& grid) {
  return Observable(SingularKernel(grid, std::vector<complex>(grid->size(), complex{1.0, 0.0})),
                    RegularKernel::zero(grid));
}

Observable hamiltonian_observable(const GridPtr& grid) {
  std::vector<complex> values(grid->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = grid->point(i);
  return Observable(SingularKernel(grid, std::move(values)), RegularKernel::zero(grid));
}

complex state_trace(const StateFunctional& state) {
  const auto w = state.grid()->weights();
  std::vector<complex> terms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) terms[i] = w[i] * state.singular()[i];
  return pairwise_sum<complex>(terms);
}

ValidationReport validate_state(const StateFunctional& state) {
  ValidationReport report;
  const EnergyGrid& g = *state.grid();
  const auto& rho = state.singular().values();

  double worst_imag = 0.0, worst_negative = 0.0;
  bool finite = true;
  for (const complex& v : rho) {
    finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
    worst_imag = std::max(worst_imag, std::abs(v.imag()));
    worst_negative = std::max(worst_negative, -v.real());
  }
  if (!finite) report.violations.push_back({"singular-finite", INFINITY});
  if (worst_imag > 1e-12) report.violations.push_back({"singular-real", worst_imag});
  if (worst_negative > 1e-12) report.violations.push_back({"singular-nonnegative", worst_negative});

  const double norm_residual = std::abs(state_trace(state) - 1.0);
  if (!(norm_residual <= 1e-10)) report.violations.push_back({"normalization", norm_residual});

  const double herm = state.regular().hermiticity_residual();
  if (!(herm <= 1e-12)) report.violations.push_back({"hermiticity", herm});

  // Mass sitting at the truncation edge means omega_max was chosen too small.
  const std::size_t last = g.size() - 1;
  double edge = g.weight(last) * std::abs(rho[last]);
  const auto& reg = state.regular().values();
  for (std::size_t j = 0; j < g.size(); ++j)
    edge = std::max(edge, g.weight(last) * g.weight(j) * std::abs(reg(static_cast<Eigen::Index>(last),
                                                                        static_cast<Eigen::Index>(j))));
  if (edge > 1e-10) report.warnings.push_back({"truncation-edge-mass", edge});
  return report;
}

StateFunctional combine(complex a, const StateFunctional& x, complex b, const StateFunctional& y) {
  require_same_grid(x.grid(), y.grid());
  std::vector<complex> s(x.singular().size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = a * x.singular()[i] + b * y.singular()[i];
  ComplexMatrix r = a * x.regular().values() + b * y.regular().values();
  return StateFunctional(SingularKernel(x.grid(), std::move(s)), RegularKernel(x.grid(), std::move(r)));
}

}  // namespace vanhove
