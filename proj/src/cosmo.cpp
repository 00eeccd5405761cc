#include "vanhove/cosmo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Eigenvalues>

#include "vanhove/errors.hpp"
#include "vanhove/io.hpp"
#include "vanhove/parallel.hpp"

namespace vanhove::cosmo {

Potential Potential::constant(double lambda, double a1) {
  require(std::isfinite(lambda) && std::isfinite(a1) && a1 > 0, ErrorCode::invalid_argument,
          "constant potential needs finite lambda and a1 > 0");
  return Potential(PotentialFamily::constant, lambda, a1);
}

Potential Potential::quadratic_cap(double lambda, double a1) {
  require(std::isfinite(lambda) && std::isfinite(a1) && a1 > 0, ErrorCode::invalid_argument,
          "quadratic-cap potential needs finite lambda and a1 > 0");
  return Potential(PotentialFamily::quadratic_cap, lambda, a1);
}

Potential Potential::table(std::vector<double> a, std::vector<double> v) {
  require(a.size() >= 2 && a.size() == v.size(), ErrorCode::invalid_argument,
          "potential table needs at least two (a, V) rows");
  require(a.front() == 0.0, ErrorCode::invalid_argument, "potential table must start at a = 0");
  for (std::size_t k = 1; k < a.size(); ++k)
    require(a[k] > a[k - 1], ErrorCode::invalid_argument, "potential table a values must increase");
  for (double x : v) require(std::isfinite(x), ErrorCode::invalid_argument, "potential table has non-finite V");
  Potential p(PotentialFamily::table, 0.0, a.back());
  p.table_a_ = std::move(a);
  p.table_v_ = std::move(v);
  return p;
}

double Potential::operator()(double a) const {
  if (a > a1_) return 0.0;
  switch (family_) {
    case PotentialFamily::constant:
      return lambda_;
    case PotentialFamily::quadratic_cap:
      return lambda_ * (1.0 - (a / a1_) * (a / a1_));
    case PotentialFamily::table: {
      if (a <= 0.0) return table_v_.front();
      const auto it = std::upper_bound(table_a_.begin(), table_a_.end(), a);
      const auto hi = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - table_a_.begin(),
                                                                          static_cast<std::ptrdiff_t>(table_a_.size() - 1)));
      const std::size_t lo = hi - 1;
      const double f = (a - table_a_[lo]) / (table_a_[hi] - table_a_[lo]);
      return (1 - f) * table_v_[lo] + f * table_v_[hi];
    }
  }
  return 0.0;
}

namespace {

using OdeState = std::array<double, 2>;  // (a, S)

void check_potential(double v, double a) {
  if (v < 0.0) {
    std::ostringstream msg;
    msg << "V(" << a << ") = " << v << " < 0";
    fail(ErrorCode::invalid_potential, msg.str());
  }
}

}  // namespace

ScaleFactorSolution solve_scale_factor(const Potential& potential, double a0, int branch, double eta_max,
                                       double tol, std::size_t samples) {
  namespace odeint = boost::numeric::odeint;
  require(branch == 1 || branch == -1, ErrorCode::invalid_argument, "branch must be +1 or -1");
  require(a0 >= 0.0 && a0 <= potential.a1(), ErrorCode::invalid_argument, "a0 must lie in [0, a1]");
  require(tol > 0.0 && std::isfinite(tol), ErrorCode::invalid_argument, "tolerance must be positive");
  require(eta_max > 0.0 && std::isfinite(eta_max), ErrorCode::invalid_argument, "eta_max must be positive");
  require(samples >= 2, ErrorCode::invalid_argument, "need at least two samples");

  ScaleFactorSolution sol;
  sol.branch = branch;
  sol.a0 = a0;
  sol.eta.resize(samples);
  for (std::size_t k = 0; k < samples; ++k)
    sol.eta[k] = k + 1 == samples ? eta_max : eta_max * static_cast<double>(k) / static_cast<double>(samples - 1);
  sol.a.assign(samples, a0);
  sol.S.assign(samples, 0.0);

  const double a1 = potential.a1();
  const double edge = branch > 0 ? a1 : 0.0;
  const auto beyond = [&](double a) { return branch > 0 ? a >= a1 : a <= 0.0; };
  check_potential(potential(a0), a0);
  if (beyond(a0)) {
    sol.a.assign(samples, edge);
    sol.freeze_eta = 0.0;
    return sol;
  }

  const auto rhs = [&](const OdeState& x, OdeState& dx, double) {
    const double v = potential(x[0]);
    if (x[0] >= 0.0 && x[0] <= a1) check_potential(v, x[0]);
    const double vp = std::max(v, 0.0);
    dx[0] = branch * std::sqrt(2.0 * vp);
    dx[1] = 2.0 * vp;
  };

  auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<OdeState>());
  stepper.initialize(OdeState{a0, 0.0}, 0.0, std::min(eta_max / 100.0, 0.1));
  std::size_t next = 1;
  OdeState x{};
  while (next < samples) {
    const auto [t0, t1] = stepper.do_step(rhs);
    if (beyond(stepper.current_state()[0])) {
      // Locate the crossing inside [t0, t1] on the dense-output interpolant.
      double lo = t0, hi = t1;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, x);
        (beyond(x[0]) ? hi : lo) = mid;
      }
      const double t_freeze = hi;
      for (; next < samples && sol.eta[next] < t_freeze; ++next) {
        stepper.calc_state(sol.eta[next], x);
        sol.a[next] = x[0];
        sol.S[next] = x[1];
      }
      stepper.calc_state(t_freeze, x);
      const double s_freeze = x[1];
      for (; next < samples; ++next) {
        sol.a[next] = edge;
        sol.S[next] = s_freeze;
      }
      sol.freeze_eta = t_freeze;
      break;
    }
    for (; next < samples && sol.eta[next] <= t1; ++next) {
      stepper.calc_state(sol.eta[next], x);
      sol.a[next] = x[0];
      sol.S[next] = x[1];
    }
  }
  return sol;
}

double constraint_residual(const ScaleFactorSolution& sol, const Potential& potential) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < sol.eta.size(); ++k) {
    if (sol.freeze_eta && sol.eta[k + 1] > *sol.freeze_eta) break;
    const double da = sol.a[k + 1] - sol.a[k];
    if (da == 0.0) continue;
    const double slope = (sol.S[k + 1] - sol.S[k]) / da;
    worst = std::max(worst, std::abs(slope * slope - 2.0 * potential(0.5 * (sol.a[k] + sol.a[k + 1]))));
  }
  return worst;
}

void write_scale_factor_csv(std::ostream& out, const ScaleFactorSolution& sol) {
  io::write_row(out, {"eta", "a", "S"});
  for (std::size_t k = 0; k < sol.eta.size(); ++k)
    io::write_row(out, {io::format_double(sol.eta[k]), io::format_double(sol.a[k]), io::format_double(sol.S[k])});
}

double mode_frequency(double k, double a, double m) { return std::sqrt(m * m * a * a + k * k); }

ModeSet ModeSet::make(std::vector<double> k_values, double m, double a_out) {
  require(!k_values.empty(), ErrorCode::invalid_argument, "mode set must not be empty");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    require(std::isfinite(k_values[i]) && k_values[i] > 0, ErrorCode::invalid_argument, "mode k must be positive");
    require(i == 0 || k_values[i] > k_values[i - 1], ErrorCode::invalid_argument,
            "mode k values must be distinct and sorted");
  }
  require(std::isfinite(m) && m >= 0, ErrorCode::invalid_argument, "mass must be nonnegative");
  require(std::isfinite(a_out) && a_out > 0, ErrorCode::invalid_argument, "a_out must be positive");
  return ModeSet{std::move(k_values), m, a_out};
}

std::vector<double> ModeSet::frequencies() const {
  std::vector<double> out;
  out.reserve(k_values.size());
  for (double k : k_values) out.push_back(mode_frequency(k, a_out, m));
  return out;
}

std::vector<double> sqrt_prime_modes(std::size_t count) {
  std::vector<double> out;
  for (long candidate = 2; out.size() < count; ++candidate) {
    bool prime = true;
    for (long d = 2; d * d <= candidate && prime; ++d) prime = candidate % d != 0;
    if (prime) out.push_back(std::sqrt(static_cast<double>(candidate)));
  }
  return out;
}

double adiabaticity(const ModeSet& modes, const Potential& potential) {
  const double v = potential(modes.a_out);
  check_potential(v, modes.a_out);
  const double a_dot = std::sqrt(2.0 * v);
  double worst = 0.0;
  for (double k : modes.k_values) {
    const double omega = mode_frequency(k, modes.a_out, modes.m);
    const double d_omega = modes.m * modes.m * modes.a_out / omega * a_dot;
    worst = std::max(worst, std::abs(d_omega) / (omega * omega));
  }
  return worst;
}

std::string occupation_label(const std::vector<int>& n) {
  std::string s = "n=";
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (k) s += '_';
    s += std::to_string(n[k]);
  }
  return s;
}

FockBasis enumerate_fock(const ModeSet& modes, int n_max, double omega_cut, double shell_tol, std::size_t max_size) {
  require(n_max >= 1, ErrorCode::invalid_argument, "n_max must be at least 1");
  require(!(omega_cut < 0.0), ErrorCode::invalid_argument, "omega_cut must be nonnegative");
  require(shell_tol >= 0.0, ErrorCode::invalid_argument, "shell tolerance must be nonnegative");
  const std::vector<double> freq = modes.frequencies();
  const std::size_t nm = freq.size();

  struct Entry {
    double omega;
    std::vector<int> n;
  };
  std::vector<Entry> found;
  std::vector<int> n(nm, 0);
  // Depth-first over modes; frequencies are positive so the partial energy only grows.
  const auto visit = [&](auto&& self, std::size_t mode, double partial) -> void {
    if (mode == nm) {
      double omega = 0.0;
      for (std::size_t k = 0; k < nm; ++k) omega += n[k] * freq[k];
      if (omega <= omega_cut) {
        require(found.size() < max_size, ErrorCode::size_limit, "Fock basis exceeds the size limit");
        found.push_back({omega, n});
      }
      return;
    }
    for (int occ = 0; occ <= n_max; ++occ) {
      const double e = partial + occ * freq[mode];
      if (e > omega_cut * (1 + 1e-15)) break;
      n[mode] = occ;
      self(self, mode + 1, e);
    }
    n[mode] = 0;
  };
  visit(visit, 0, 0.0);
  std::sort(found.begin(), found.end(), [](const Entry& x, const Entry& y) {
    return x.omega != y.omega ? x.omega < y.omega : x.n < y.n;
  });

  FockBasis basis;
  basis.modes = modes;
  double total = 1.0;
  for (std::size_t k = 0; k < nm; ++k) total *= n_max + 1;
  basis.excluded = total > 1.8e19 ? SIZE_MAX : static_cast<std::size_t>(total) - found.size();
  for (auto& e : found) {
    const std::size_t i = basis.occupations.size();
    if (basis.shells.empty() || e.omega - basis.shells.back().omega > shell_tol * std::max(1.0, e.omega))
      basis.shells.push_back({e.omega, i, 0});
    ++basis.shells.back().count;
    basis.shell_of.push_back(basis.shells.size() - 1);
    basis.energies.push_back(e.omega);
    basis.labels.push_back({occupation_label(e.n), std::vector<double>(e.n.begin(), e.n.end())});
    basis.occupations.push_back(std::move(e.n));
  }
  return basis;
}

CosmoState::CosmoState(std::shared_ptr<const FockBasis> basis, ComplexMatrix matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  require(basis_ != nullptr, ErrorCode::invalid_argument, "state needs a basis");
  const auto n = static_cast<Eigen::Index>(basis_->size());
  require(matrix_.rows() == n && matrix_.cols() == n, ErrorCode::incompatible_basis,
          "density matrix does not match the basis dimension");
  require(matrix_.allFinite(), ErrorCode::invalid_argument, "density matrix has non-finite entries");
  const double herm = (matrix_ - ComplexMatrix(matrix_.adjoint())).cwiseAbs().maxCoeff();
  require(herm <= 1e-12, ErrorCode::invalid_argument, "density matrix is not Hermitian");
  const double trace = matrix_.trace().real();
  require(std::abs(trace - 1.0) <= 1e-10, ErrorCode::invalid_argument, "density matrix trace differs from 1");
}

ComplexMatrix CosmoState::shell_block(std::size_t s) const {
  const auto& sh = basis_->shells.at(s);
  const auto f = static_cast<Eigen::Index>(sh.first), c = static_cast<Eigen::Index>(sh.count);
  return matrix_.block(f, f, c, c);
}

double CosmoState::cross_shell_residual() const {
  double worst = 0.0;
  const auto n = matrix_.rows();
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (basis_->shell_of[static_cast<std::size_t>(a)] != basis_->shell_of[static_cast<std::size_t>(b)])
        worst = std::max(worst, std::abs(matrix_(a, b)));
  return worst;
}

double CosmoState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(matrix_), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

CosmoState random_cosmo_state(std::shared_ptr<const FockBasis> basis, CounterRng& rng) {
  const auto n = static_cast<Eigen::Index>(basis->size());
  return CosmoState(std::move(basis), random_density_matrix(rng, n));
}

CosmoState thermal_state(std::shared_ptr<const FockBasis> basis, double beta) {
  require(std::isfinite(beta) && beta >= 0, ErrorCode::invalid_argument, "beta must be nonnegative");
  const std::size_t n = basis->size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(-beta * (basis->energies[i] - basis->energies.front()));
  const double z = pairwise_sum<double>(w);
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = w[i] / z;
  return CosmoState(std::move(basis), std::move(m));
}

double cosmo_expectation(const CosmoState& state, const ComplexMatrix& obs, double t) {
  require(std::isfinite(t), ErrorCode::invalid_argument, "time must be finite");
  const FockBasis& basis = state.basis();
  const std::size_t n = basis.size();
  require(obs.rows() == static_cast<Eigen::Index>(n) && obs.cols() == static_cast<Eigen::Index>(n),
          ErrorCode::incompatible_basis, "observable does not match the basis dimension");
  const ComplexMatrix& rho = state.matrix();
  std::vector<complex> rows(n);
#pragma omp parallel for schedule(static)
  for (std::size_t a = 0; a < n; ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    const double wa = basis.shell_energy(a);
    rows[a] = pairwise_reduce<complex>(0, n, [&](std::size_t b) {
      const auto ib = static_cast<Eigen::Index>(b);
      const complex term = rho(ia, ib) * obs(ib, ia);
      if (basis.shell_of[a] == basis.shell_of[b]) return term;
      return term * std::polar(1.0, -(wa - basis.shell_energy(b)) * t);
    });
  }
  const complex value = pairwise_sum<complex>(rows);
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real()))) {
    std::ostringstream msg;
    msg << "cosmo expectation at t=" << t << " has imaginary part " << value.imag();
    fail(ErrorCode::numerical, msg.str());
  }
  return value.real();
}

CosmoState cosmo_weak_limit(const CosmoState& state) {
  const FockBasis& basis = state.basis();
  ComplexMatrix m = state.matrix();
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b)
      if (basis.shell_of[static_cast<std::size_t>(a)] != basis.shell_of[static_cast<std::size_t>(b)]) m(a, b) = 0.0;
  return CosmoState(state.basis_ptr(), std::move(m));
}

std::vector<PointerBasis> diagonalize_remaining(const CosmoState& state, double tol) {
  const double cross = state.cross_shell_residual();
  if (cross > tol) {
    std::ostringstream msg;
    msg << "state still has cross-shell coherence " << cross;
    fail(ErrorCode::not_equilibrated, msg.str());
  }
  const FockBasis& basis = state.basis();
  std::vector<ShellState> shells;
  shells.reserve(basis.shells.size());
  for (std::size_t s = 0; s < basis.shells.size(); ++s) {
    const auto& sh = basis.shells[s];
    ShellState shell;
    shell.omega = sh.omega;
    shell.labels.assign(basis.labels.begin() + static_cast<std::ptrdiff_t>(sh.first),
                        basis.labels.begin() + static_cast<std::ptrdiff_t>(sh.first + sh.count));
    shell.block = state.shell_block(s);
    shells.push_back(std::move(shell));
  }
  return pointer_state(shells);
}

void write_spectrum_csv(std::ostream& out, const std::vector<PointerBasis>& bases) {
  io::write_row(out, {"omega", "label", "eigenvalue"});
  for (const auto& b : bases)
    for (std::size_t l = 0; l < b.eigenvalues.size(); ++l) {
      const std::size_t k = b.dominant_label(l);
      const std::string label = k < b.labels.size() ? b.labels[k].name : std::to_string(l);
      io::write_row(out, {io::format_double(b.omega), label, io::format_double(b.eigenvalues[l])});
    }
}

}  // namespace vanhove::cosmo
