#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "vanhove/kernels.hpp"

namespace vanhove {

// Unitary phase law: singular part untouched, rho(i,j) *= exp(-i (w_i - w_j) t).
// Phases are evaluated per entry from (w_i - w_j) t, never accumulated.
StateFunctional evolve(const StateFunctional& state, double t);

/// Evaluates <O>(t) for one (state, observable) pair at many times.
///
/// The time-independent term and the products w_i w_j rho(i,j) O(j,i) are
/// formed once; each time then costs one n x n contraction against the
/// directly evaluated phases exp(-i w_i t) exp(+i w_j t).
class ExpectationSeries {
 public:
  ExpectationSeries(const StateFunctional& state, const Observable& obs);

  complex singular_term() const noexcept { return singular_term_; }
  complex regular_term(double t) const;
  complex at(double t) const { return singular_term_ + regular_term(t); }

  // Real part with the same |Im| guard as pair_real.
  double real_at(double t) const;

  // Parallel over times; output order follows `times`.
  std::vector<double> real_at(std::span<const double> times) const;

 private:
  GridPtr grid_;
  complex singular_term_;
  ComplexMatrix products_;  // w_i w_j rho(i,j) O(j,i)
  bool check_imag_;
};

double expectation(const StateFunctional& state, const Observable& obs, double t);

// Drops the coherences: rho* keeps rho(omega) and has a zero regular part.
StateFunctional weak_limit(const StateFunctional& state);

struct DecayProfile {
  std::vector<double> times;
  std::vector<double> offdiag_abs;
  std::vector<double> expectation;
  double diag_value = 0.0;
};

DecayProfile decay_profile(const StateFunctional& state, const Observable& obs,
                           std::span<const double> times);

// First sample time after which offdiag_abs stays <= threshold * offdiag_abs[0]
// for the rest of the profile. Requires sustained decay rather than a first
// crossing, so ringing envelopes do not trigger early.
std::optional<double> decoherence_time(const DecayProfile& profile, double threshold);

struct GaussianEnvelopeFit {
  double rate = 0.0;        // sigma_eff^2 in |offdiag| ~ A exp(-rate t^2)
  double log_amplitude = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

// Least squares of log(offdiag_abs) against t^2 over samples with
// offdiag_abs > relative_floor * offdiag_abs[0] and t < t_max.
GaussianEnvelopeFit fit_gaussian_envelope(const DecayProfile& profile, double relative_floor = 1e-8,
                                          double t_max = std::numeric_limits<double>::infinity());

// Header t,offdiag_abs,expectation; 17 significant digits.
void write_decay_csv(std::ostream& out, const DecayProfile& profile);

}  // namespace vanhove
