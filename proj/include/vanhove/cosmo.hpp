#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vanhove/kernels.hpp"
#include "vanhove/pointer_basis.hpp"
#include "vanhove/rng.hpp"

namespace vanhove::cosmo {

enum class PotentialFamily { constant, quadratic_cap, table };

/// Compactly supported potential V(a) on [0, a1]; V = 0 beyond a1.
class Potential {
 public:
  // V = lambda on [0, a1].
  static Potential constant(double lambda, double a1);
  // V = lambda (1 - (a / a1)^2) on [0, a1].
  static Potential quadratic_cap(double lambda, double a1);
  // Piecewise-linear through (a_k, v_k); a_0 = 0 and a1 = last a_k.
  static Potential table(std::vector<double> a, std::vector<double> v);

  PotentialFamily family() const noexcept { return family_; }
  double a1() const noexcept { return a1_; }
  // May be negative for a malformed potential; solve_scale_factor rejects that.
  double operator()(double a) const;

 private:
  Potential(PotentialFamily family, double lambda, double a1) : family_(family), lambda_(lambda), a1_(a1) {}

  PotentialFamily family_;
  double lambda_ = 0.0;
  double a1_ = 0.0;
  std::vector<double> table_a_, table_v_;
};

struct ScaleFactorSolution {
  int branch = 1;  // +1 expanding, -1 contracting
  double a0 = 0.0;
  std::vector<double> eta;
  std::vector<double> a;
  std::vector<double> S;
  // Time at which a reached the support edge (a1, or 0 on the - branch).
  std::optional<double> freeze_eta;
};

// Integrates da/deta = branch * sqrt(2 V(a)) and dS/deta = 2 V(a) (so that
// dS/da = branch * sqrt(2V)) with adaptive Dormand-Prince, sampling at
// `samples` equally spaced times in [0, eta_max]. Once a reaches a1 (or 0)
// it is frozen there.
ScaleFactorSolution solve_scale_factor(const Potential& potential, double a0, int branch, double eta_max,
                                       double tol, std::size_t samples = 201);

// max |(dS/da)^2 - 2 V(a_mid)| over consecutive pre-freeze samples, using
// finite differences of the stored samples.
double constraint_residual(const ScaleFactorSolution& sol, const Potential& potential);

void write_scale_factor_csv(std::ostream& out, const ScaleFactorSolution& sol);

// Omega = sqrt(m^2 a^2 + k^2)
double mode_frequency(double k, double a, double m);

/// Finite set of mode moduli evaluated in the asymptotic region a = a_out.
struct ModeSet {
  std::vector<double> k_values;
  double m = 0.0;
  double a_out = 1.0;

  // Throws invalid-argument unless k is positive, distinct and sorted.
  static ModeSet make(std::vector<double> k_values, double m, double a_out);
  std::vector<double> frequencies() const;
};

// k_j = sqrt(p_j) for the first `count` primes.
std::vector<double> sqrt_prime_modes(std::size_t count);

// max_k |dOmega_k/deta| / Omega_k^2 at a_out along the scale-factor flow.
double adiabaticity(const ModeSet& modes, const Potential& potential);

/// Occupation-number basis at a_out, sorted by (omega, lexicographic n).
struct FockBasis {
  ModeSet modes;
  std::vector<std::vector<int>> occupations;
  std::vector<double> energies;
  std::vector<LabelDescriptor> labels;
  // Energy shells as [first, first + count) ranges of consecutive vectors.
  struct Shell {
    double omega;
    std::size_t first;
    std::size_t count;
  };
  std::vector<Shell> shells;
  std::vector<std::size_t> shell_of;  // per basis vector
  // Occupation vectors within the per-mode cap that omega_cut removed.
  std::size_t excluded = 0;

  std::size_t size() const noexcept { return occupations.size(); }
  // Shell energy used for the phase of vector i.
  double shell_energy(std::size_t i) const { return shells[shell_of[i]].omega; }
};

// Every n with 0 <= n_k <= n_max per mode and omega(n) <= omega_cut.
// Energies within shell_tol * max(1, omega) of the previous vector share a shell.
FockBasis enumerate_fock(const ModeSet& modes, int n_max, double omega_cut, double shell_tol = 1e-9,
                         std::size_t max_size = 1u << 16);

// "n=1_0_2"
std::string occupation_label(const std::vector<int>& n);

/// Density matrix over a Fock basis; shell blocks are the diagonal-in-omega
/// part, everything else is cross-shell coherence.
class CosmoState {
 public:
  // Checks Hermiticity (1e-12) and unit trace (1e-10).
  CosmoState(std::shared_ptr<const FockBasis> basis, ComplexMatrix matrix);

  const FockBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const noexcept { return basis_; }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }

  ComplexMatrix shell_block(std::size_t s) const;
  // Largest |rho(a, b)| with a and b in different shells.
  double cross_shell_residual() const;
  // Smallest eigenvalue; positivity is only checked on demand.
  double min_eigenvalue() const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  ComplexMatrix matrix_;
};

CosmoState random_cosmo_state(std::shared_ptr<const FockBasis> basis, CounterRng& rng);
// exp(-beta omega) / Z on the diagonal.
CosmoState thermal_state(std::shared_ptr<const FockBasis> basis, double beta);

// sum_ab rho(a,b) O(b,a) exp(-i (omega_a - omega_b) t), with omega the shell
// energy, so same-shell terms carry no phase. Throws incompatible-basis on
// dimension mismatch.
double cosmo_expectation(const CosmoState& state, const ComplexMatrix& obs, double t);

CosmoState cosmo_weak_limit(const CosmoState& state);

// Per-shell pointer bases; throws not-equilibrated if cross-shell entries exceed tol.
std::vector<PointerBasis> diagonalize_remaining(const CosmoState& state, double tol = 1e-10);

// Header omega,label,eigenvalue. The label is the dominant occupation vector.
void write_spectrum_csv(std::ostream& out, const std::vector<PointerBasis>& bases);

}  // namespace vanhove::cosmo
