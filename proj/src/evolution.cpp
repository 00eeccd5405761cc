#include "vanhove/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vanhove/errors.hpp"
#include "vanhove/io.hpp"
#include "vanhove/parallel.hpp"

namespace vanhove {

StateFunctional evolve(const StateFunctional& state, double t) {
  require(std::isfinite(t), ErrorCode::invalid_argument, "evolution time must be finite");
  const EnergyGrid& g = *state.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  ComplexMatrix out = state.regular().values();
  if (t != 0.0) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double wi = g.point(static_cast<std::size_t>(i));
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double phase = -(wi - g.point(static_cast<std::size_t>(j))) * t;
        out(i, j) *= complex(std::cos(phase), std::sin(phase));
      }
    }
  }
  return StateFunctional(state.singular(), RegularKernel(state.grid(), std::move(out)));
}

ExpectationSeries::ExpectationSeries(const StateFunctional& state, const Observable& obs)
    : grid_(state.grid()), check_imag_(obs.self_adjoint()) {
  require_same_grid(state.grid(), obs.grid());
  const EnergyGrid& g = *grid_;
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto w = g.weights();
  singular_term_ = pairwise_reduce<complex>(0, g.size(), [&](std::size_t i) {
    return w[i] * state.singular()[i] * obs.singular()[i];
  });
  const ComplexMatrix& rho = state.regular().values();
  const ComplexMatrix& op = obs.regular().values();
  products_.resize(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      products_(i, j) = w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] * rho(i, j) * op(j, i);
}

complex ExpectationSeries::regular_term(double t) const {
  require(std::isfinite(t), ErrorCode::invalid_argument, "evolution time must be finite");
  const EnergyGrid& g = *grid_;
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXcd phase(n), conj_phase(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = -g.point(static_cast<std::size_t>(i)) * t;
    phase(i) = complex(std::cos(a), std::sin(a));
    conj_phase(i) = std::conj(phase(i));
  }
  std::vector<complex> rows(static_cast<std::size_t>(n));
  // Each row is reduced by Eigen in a fixed order, so threads only change who
  // computes a row, never the result.
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    rows[static_cast<std::size_t>(i)] = phase(i) * (products_.row(i).transpose().array() * conj_phase.array()).sum();
  return pairwise_sum<complex>(rows);
}

double ExpectationSeries::real_at(double t) const {
  const complex value = at(t);
  if (check_imag_ && std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real()))) {
    std::ostringstream msg;
    msg << "expectation at t=" << t << " has imaginary part " << value.imag();
    fail(ErrorCode::numerical, msg.str());
  }
  return value.real();
}

std::vector<double> ExpectationSeries::real_at(std::span<const double> times) const {
  for (double t : times) require(std::isfinite(t), ErrorCode::invalid_argument, "times must be finite");
  std::vector<double> out(times.size());
  // Nested regions are off, so regular_term runs serially inside each task.
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < times.size(); ++k) {
    try {
      out[k] = real_at(times[k]);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

double expectation(const StateFunctional& state, const Observable& obs, double t) {
  require(std::isfinite(t), ErrorCode::invalid_argument, "evolution time must be finite");
  return ExpectationSeries(state, obs).real_at(t);
}

StateFunctional weak_limit(const StateFunctional& state) {
  return StateFunctional(state.singular(), RegularKernel::zero(state.grid()));
}

DecayProfile decay_profile(const StateFunctional& state, const Observable& obs,
                           std::span<const double> times) {
  require(!times.empty(), ErrorCode::invalid_argument, "decay profile needs at least one time");
  const ExpectationSeries series(state, obs);
  DecayProfile profile;
  profile.times.assign(times.begin(), times.end());
  profile.diag_value = pair_real(weak_limit(state), obs);
  profile.expectation = series.real_at(times);
  profile.offdiag_abs.resize(times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    profile.offdiag_abs[k] = std::abs(profile.expectation[k] - profile.diag_value);
  return profile;
}

std::optional<double> decoherence_time(const DecayProfile& profile, double threshold) {
  require(threshold > 0.0 && threshold < 1.0, ErrorCode::invalid_argument,
          "decoherence threshold must lie in (0, 1)");
  if (profile.offdiag_abs.empty() || profile.offdiag_abs.front() == 0.0) return std::nullopt;
  const double level = threshold * profile.offdiag_abs.front();
  // Walk backwards to find the start of the trailing sub-threshold run.
  std::size_t k = profile.offdiag_abs.size();
  while (k > 0 && profile.offdiag_abs[k - 1] <= level) --k;
  if (k == profile.offdiag_abs.size()) return std::nullopt;
  return profile.times[k];
}

GaussianEnvelopeFit fit_gaussian_envelope(const DecayProfile& profile, double relative_floor, double t_max) {
  require(!profile.offdiag_abs.empty() && profile.offdiag_abs.front() > 0.0, ErrorCode::invalid_argument,
          "envelope fit needs a nonzero initial coherence");
  const double floor = relative_floor * profile.offdiag_abs.front();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < profile.times.size(); ++k) {
    const double t = profile.times[k];
    const double y = profile.offdiag_abs[k];
    if (!(y > floor) || !(t < t_max)) continue;
    const double x = t * t;
    const double ly = std::log(y);
    sx += x, sy += ly, sxx += x * x, sxy += x * ly, syy += ly * ly;
    ++m;
  }
  require(m >= 3, ErrorCode::numerical, "envelope fit needs at least 3 samples above the floor");
  const double dm = static_cast<double>(m);
  const double cov = sxy - sx * sy / dm;
  const double varx = sxx - sx * sx / dm;
  const double vary = syy - sy * sy / dm;
  require(varx > 0.0, ErrorCode::numerical, "envelope fit needs distinct times");
  GaussianEnvelopeFit fit;
  const double slope = cov / varx;
  fit.rate = -slope;
  fit.log_amplitude = (sy - slope * sx) / dm;
  fit.r_squared = vary > 0.0 ? std::min(1.0, cov * cov / (varx * vary)) : 1.0;
  fit.samples = m;
  return fit;
}

void write_decay_csv(std::ostream& out, const DecayProfile& profile) {
  io::write_row(out, {"t", "offdiag_abs", "expectation"});
  for (std::size_t k = 0; k < profile.times.size(); ++k)
    io::write_row(out, {io::format_double(profile.times[k]), io::format_double(profile.offdiag_abs[k]),
                        io::format_double(profile.expectation[k])});
}

}  // namespace vanhove
