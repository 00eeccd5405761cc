#include "vanhove/wigner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vanhove/errors.hpp"
#include "vanhove/io.hpp"
#include "vanhove/parallel.hpp"

namespace vanhove {

static_assert(std::endian::native == std::endian::little, "binary phase grids assume a little-endian host");

namespace {

// Gaussian tails beyond this many widths are below 1.3e-14 of the peak.
constexpr double kCutoffWidths = 8.0;

double unit_gaussian(double x, double eps) {
  const double z = x / eps;
  return std::exp(-0.5 * z * z) / (eps * std::sqrt(2.0 * std::numbers::pi));
}

void require_same_phase_grid(const PhaseGrid& a, const PhaseGrid& b) {
  require(a == b, ErrorCode::incompatible_grids, "phase fields live on different grids");
}

}  // namespace

PhaseGrid::PhaseGrid(double q_min, double q_max, std::size_t nq, double p_min, double p_max, std::size_t np)
    : q_min_(q_min), q_max_(q_max), p_min_(p_min), p_max_(p_max), nq_(nq), np_(np) {
  require(nq >= 2 && np >= 2, ErrorCode::invalid_argument, "phase grid needs nq, np >= 2");
  require(std::isfinite(q_min) && std::isfinite(q_max) && q_max > q_min, ErrorCode::invalid_argument,
          "phase grid q range is degenerate");
  require(std::isfinite(p_min) && std::isfinite(p_max) && p_max > p_min, ErrorCode::invalid_argument,
          "phase grid p range is degenerate");
}

double PhaseGrid::q(std::size_t i) const noexcept {
  return i + 1 == nq_ ? q_max_ : q_min_ + dq() * static_cast<double>(i);
}

double PhaseGrid::p(std::size_t j) const noexcept {
  return j + 1 == np_ ? p_max_ : p_min_ + dp() * static_cast<double>(j);
}

double PhaseGrid::node_weight(std::size_t i, std::size_t j) const noexcept {
  const double wq = (i == 0 || i + 1 == nq_) ? 0.5 : 1.0;
  const double wp = (j == 0 || j + 1 == np_) ? 0.5 : 1.0;
  return wq * wp * cell_area();
}

PhaseField::PhaseField(PhaseGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorCode::invalid_argument, "phase field shape mismatch");
  for (double v : values_) require(std::isfinite(v), ErrorCode::invalid_argument, "phase field has non-finite entries");
}

double PhaseField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PhaseField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double PhaseField::interpolate(double q, double p) const {
  const double x = std::clamp((q - grid_.q_min()) / grid_.dq(), 0.0, static_cast<double>(grid_.nq() - 1));
  const double y = std::clamp((p - grid_.p_min()) / grid_.dp(), 0.0, static_cast<double>(grid_.np() - 1));
  const auto i = std::min(static_cast<std::size_t>(x), grid_.nq() - 2);
  const auto j = std::min(static_cast<std::size_t>(y), grid_.np() - 2);
  const double fx = x - static_cast<double>(i);
  const double fy = y - static_cast<double>(j);
  return (1 - fx) * (1 - fy) * at(i, j) + fx * (1 - fy) * at(i + 1, j) + (1 - fx) * fy * at(i, j + 1) +
         fx * fy * at(i + 1, j + 1);
}

PhaseField sample_field(const PhaseGrid& grid, const std::function<double(double, double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.nq(); ++i)
    for (std::size_t j = 0; j < grid.np(); ++j) v[grid.index(i, j)] = f(grid.q(i), grid.p(j));
  return PhaseField(grid, std::move(v));
}

PhaseField harmonic_hamiltonian(const PhaseGrid& grid, double mass, double frequency) {
  require(mass > 0 && frequency > 0, ErrorCode::invalid_argument, "harmonic H needs positive mass and frequency");
  return sample_field(grid, [=](double q, double p) {
    return p * p / (2 * mass) + 0.5 * mass * frequency * frequency * q * q;
  });
}

PhaseField free_hamiltonian(const PhaseGrid& grid, double mass) {
  require(mass > 0, ErrorCode::invalid_argument, "free H needs positive mass");
  return sample_field(grid, [=](double, double p) { return p * p / (2 * mass); });
}

PhaseField coordinate_field(const PhaseGrid& grid) {
  return sample_field(grid, [](double q, double) { return q; });
}

PhaseField momentum_field(const PhaseGrid& grid) {
  return sample_field(grid, [](double, double p) { return p; });
}

double phase_space_mass(const PhaseField& field) {
  const PhaseGrid& g = field.grid();
  std::vector<double> rows(g.nq());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < g.nq(); ++i)
    rows[i] = pairwise_reduce<double>(0, g.np(), [&](std::size_t j) { return g.node_weight(i, j) * field.at(i, j); });
  return pairwise_sum<double>(rows);
}

namespace {

std::vector<double> gradient_norms(const PhaseField& h) {
  const PhaseGrid& g = h.grid();
  std::vector<double> out;
  out.reserve(g.size());
  for (std::size_t i = 0; i < g.nq(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j) {
      const std::size_t im = i ? i - 1 : i, ip = i + 1 < g.nq() ? i + 1 : i;
      const std::size_t jm = j ? j - 1 : j, jp = j + 1 < g.np() ? j + 1 : j;
      const double dh_q = (h.at(ip, j) - h.at(im, j)) / (g.q(ip) - g.q(im));
      const double dh_p = (h.at(i, jp) - h.at(i, jm)) / (g.p(jp) - g.p(jm));
      out.push_back(std::hypot(dh_q, dh_p));
    }
  return out;
}

double median(std::vector<double> xs) {
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  return *mid;
}

}  // namespace

double energy_resolution(const PhaseField& hfield) {
  const PhaseGrid& g = hfield.grid();
  return median(gradient_norms(hfield)) * std::max(g.dq(), g.dp());
}

MollifierPolicy default_mollifier(const PhaseField& hfield) {
  const PhaseGrid& g = hfield.grid();
  return {5.0 * median(gradient_norms(hfield)) * std::hypot(g.dq(), g.dp())};
}

// ---------------------------------------------------------------------------

EnergyBins::EnergyBins(const PhaseField& energy, double width)
    : grid_(energy.grid()), lower_(energy.min()), upper_(energy.max()), width_(width) {
  require(width > 0 && std::isfinite(width), ErrorCode::invalid_argument, "energy bin width must be positive");
  const double span = upper_ - lower_;
  const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / width_)));
  widths_.assign(count, width_);
  widths_.back() = std::max(0.0, span - width_ * static_cast<double>(count - 1));
  if (span == 0.0) widths_.back() = 0.0;
  members_.resize(count);
  bin_weight_.assign(count, 0.0);
  node_bin_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.nq(); ++i)
    for (std::size_t j = 0; j < grid_.np(); ++j) {
      const std::size_t node = grid_.index(i, j);
      const std::size_t b = bin_of_value(energy.values()[node]);
      node_bin_[node] = b;
      members_[b].push_back(node);
      bin_weight_[b] += grid_.node_weight(i, j);
    }
}

std::size_t EnergyBins::bin_of_value(double h) const {
  if (!(h > lower_)) return 0;
  const auto b = static_cast<std::size_t>((h - lower_) / width_);
  return std::min(b, widths_.size() - 1);
}

std::vector<double> EnergyBins::averages(const PhaseField& field) const {
  require_same_phase_grid(field.grid(), grid_);
  const std::size_t nb = widths_.size();
  std::vector<double> avg(nb, 0.0);
  std::vector<char> filled(nb, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& nodes = members_[b];
    if (nodes.empty()) continue;
    const double s = pairwise_reduce<double>(0, nodes.size(), [&](std::size_t k) {
      const std::size_t node = nodes[k];
      return grid_.node_weight(node / grid_.np(), node % grid_.np()) * field.values()[node];
    });
    avg[b] = s / bin_weight_[b];
    filled[b] = 1;
  }
  // Fill empty bins linearly from the nearest filled neighbours.
  std::size_t prev = nb;
  for (std::size_t b = 0; b < nb; ++b) {
    if (!filled[b]) continue;
    if (prev == nb) {
      for (std::size_t k = 0; k < b; ++k) avg[k] = avg[b];
    } else if (b > prev + 1) {
      for (std::size_t k = prev + 1; k < b; ++k) {
        const double f = static_cast<double>(k - prev) / static_cast<double>(b - prev);
        avg[k] = (1 - f) * avg[prev] + f * avg[b];
      }
    }
    prev = b;
  }
  if (prev != nb)
    for (std::size_t k = prev + 1; k < nb; ++k) avg[k] = avg[prev];
  return avg;
}

double EnergyBins::integrate_averages(std::span<const double> avg) const {
  require(avg.size() == widths_.size(), ErrorCode::invalid_argument, "bin average length mismatch");
  return pairwise_reduce<double>(0, avg.size(), [&](std::size_t b) { return avg[b] * widths_[b]; });
}

double EnergyBins::integrate(const PhaseField& field) const { return integrate_averages(averages(field)); }

double EnergyBins::integrate_product(const PhaseField& a, const PhaseField& b) const {
  const auto avg_a = averages(a);
  const auto avg_b = averages(b);
  std::vector<double> prod(avg_a.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = avg_a[k] * avg_b[k];
  return integrate_averages(prod);
}

// ---------------------------------------------------------------------------

PhaseField wigner_singular(const SingularKernel& obs_singular, const PhaseField& hfield) {
  const EnergyGrid& g = *obs_singular.grid();
  const auto pts = g.points();
  std::vector<double> out(hfield.values().size(), 0.0);
  std::size_t inside = 0;
#pragma omp parallel for schedule(static) reduction(+ : inside)
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double h = hfield.values()[k];
    if (!(h >= g.omega_min() && h <= g.omega_max())) continue;
    ++inside;
    auto hi = static_cast<std::size_t>(std::upper_bound(pts.begin(), pts.end(), h) - pts.begin());
    hi = std::clamp<std::size_t>(hi, 1, pts.size() - 1);
    const std::size_t lo = hi - 1;
    const double f = (h - pts[lo]) / (pts[hi] - pts[lo]);
    out[k] = (1 - f) * obs_singular[lo].real() + f * obs_singular[hi].real();
  }
  require(inside > 0, ErrorCode::domain_mismatch, "H field never enters the energy grid");
  return PhaseField(hfield.grid(), std::move(out));
}

namespace {

void check_mollifier(const MollifierPolicy& policy, const PhaseField& hfield) {
  require(policy.epsilon > 0 && std::isfinite(policy.epsilon), ErrorCode::invalid_argument,
          "mollifier epsilon must be positive");
  const double res = energy_resolution(hfield);
  if (!(policy.epsilon > res)) {
    std::ostringstream msg;
    msg << "mollifier epsilon " << policy.epsilon << " does not exceed the grid energy resolution " << res;
    fail(ErrorCode::invalid_argument, msg.str());
  }
}

// Integral over H of the unit-area Gaussian centred at omega0, as seen by the bins.
double binned_gaussian_mass(const EnergyBins& bins, const PhaseField& hfield, double omega0, double eps) {
  const PhaseGrid& g = hfield.grid();
  const std::size_t lo = bins.bin_of_value(omega0 - kCutoffWidths * eps);
  const std::size_t hi = bins.bin_of_value(omega0 + kCutoffWidths * eps);
  std::vector<double> avg(bins.size(), 0.0);
  std::vector<char> filled(bins.size(), 0);
  for (std::size_t b = lo; b <= hi; ++b) {
    const auto& nodes = bins.nodes_in_bin(b);
    if (nodes.empty()) continue;
    double s = 0.0, wsum = 0.0;
    for (std::size_t node : nodes) {
      const double w = g.node_weight(node / g.np(), node % g.np());
      s += w * unit_gaussian(hfield.values()[node] - omega0, eps);
      wsum += w;
    }
    avg[b] = s / wsum;
    filled[b] = 1;
  }
  // Same empty-bin rule as EnergyBins::averages, restricted to [lo, hi].
  std::size_t prev = bins.size();
  for (std::size_t b = lo; b <= hi; ++b) {
    if (!filled[b]) continue;
    if (prev == bins.size()) {
      for (std::size_t k = lo; k < b; ++k) avg[k] = avg[b];
    } else {
      for (std::size_t k = prev + 1; k < b; ++k) {
        const double f = static_cast<double>(k - prev) / static_cast<double>(b - prev);
        avg[k] = (1 - f) * avg[prev] + f * avg[b];
      }
    }
    prev = b;
  }
  if (prev != bins.size())
    for (std::size_t k = prev + 1; k <= hi; ++k) avg[k] = avg[prev];
  return bins.integrate_averages(avg);
}

}  // namespace

ClassicalDensity shell_density(double omega0, const PhaseField& hfield, const MollifierPolicy& policy) {
  check_mollifier(policy, hfield);
  require(omega0 >= hfield.min() && omega0 <= hfield.max(), ErrorCode::domain_mismatch,
          "shell energy is not reached by the H field");
  const EnergyBins bins(hfield, 0.5 * policy.epsilon);
  const double eps = policy.epsilon;
  std::vector<double> v(hfield.values().size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = unit_gaussian(hfield.values()[k] - omega0, eps);
  PhaseField raw(hfield.grid(), std::move(v));
  const double mass = bins.integrate(raw);
  require(mass > 0, ErrorCode::degenerate_support, "shell density has no mass on the grid");
  for (double& x : raw.values()) x /= mass;
  return ClassicalDensity{std::move(raw), hfield, eps, 0.0};
}

ClassicalDensity classical_state_density(const SingularKernel& rho, const PhaseField& hfield,
                                         const MollifierPolicy& policy) {
  check_mollifier(policy, hfield);
  const EnergyGrid& g = *rho.grid();
  const double eps = policy.epsilon;
  const double h_lo = hfield.min(), h_hi = hfield.max();
  require(h_hi >= g.omega_min() && h_lo <= g.omega_max(), ErrorCode::domain_mismatch,
          "H field never enters the energy grid");
  const EnergyBins bins(hfield, 0.5 * eps);

  // Per-shell coefficient w_i rho_i / (binned mass of the shell Gaussian).
  std::vector<double> coeff(g.size(), 0.0);
  std::vector<double> leaked(g.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double c = g.weight(i) * rho[i].real();
    if (c == 0.0) continue;
    const double omega = g.point(i);
    if (omega < h_lo || omega > h_hi) {
      leaked[i] = c;
      continue;
    }
    coeff[i] = c / binned_gaussian_mass(bins, hfield, omega, eps);
  }

  const auto pts = g.points();
  std::vector<double> out(hfield.values().size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double h = hfield.values()[k];
    const auto first = static_cast<std::size_t>(
        std::lower_bound(pts.begin(), pts.end(), h - kCutoffWidths * eps) - pts.begin());
    const auto last = static_cast<std::size_t>(
        std::upper_bound(pts.begin(), pts.end(), h + kCutoffWidths * eps) - pts.begin());
    double s = 0.0;
    for (std::size_t i = first; i < last; ++i)
      if (coeff[i] != 0.0) s += coeff[i] * unit_gaussian(h - pts[i], eps);
    out[k] = s;
  }
  return ClassicalDensity{PhaseField(hfield.grid(), std::move(out)), hfield, eps, pairwise_sum<double>(leaked)};
}

double classical_expectation(const ClassicalDensity& rho, const PhaseField& obs) {
  require_same_phase_grid(rho.field.grid(), obs.grid());
  const EnergyBins bins(rho.energy, 0.5 * rho.mollifier_width);
  return bins.integrate_product(rho.field, obs);
}

PhaseField mollified_product(std::span<const double> l_values, std::span<const PhaseField> fields,
                             const MollifierPolicy& policy) {
  require(!fields.empty() && l_values.size() == fields.size(), ErrorCode::invalid_argument,
          "need one l value per invariant field");
  require(policy.epsilon > 0, ErrorCode::invalid_argument, "mollifier epsilon must be positive");
  for (const auto& f : fields) require_same_phase_grid(f.grid(), fields.front().grid());
  const PhaseGrid& g = fields.front().grid();
  std::vector<double> out(g.size(), 1.0);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t f = 0; f < fields.size(); ++f)
      out[k] *= unit_gaussian(fields[f].values()[k] - l_values[f], policy.epsilon);
  return PhaseField(g, std::move(out));
}

double product_mass(const PhaseField& raw, const PhaseField& first_field, double epsilon,
                    DensityNormalization rule) {
  if (rule == DensityNormalization::phase_space) return phase_space_mass(raw);
  return EnergyBins(first_field, 0.5 * epsilon).integrate(raw);
}

ClassicalDensity multi_invariant_density(std::span<const double> l_values, std::span<const PhaseField> fields,
                                         const MollifierPolicy& policy, DensityNormalization rule) {
  if (rule == DensityNormalization::energy_binned && !fields.empty()) check_mollifier(policy, fields.front());
  PhaseField raw = mollified_product(l_values, fields, policy);
  const double mass = product_mass(raw, fields.front(), policy.epsilon, rule);
  if (!(mass >= 1e-6)) {
    std::ostringstream msg;
    msg << "invariant level sets do not intersect on the grid (mass " << mass << ")";
    fail(ErrorCode::degenerate_support, msg.str());
  }
  for (double& x : raw.values()) x /= mass;
  return ClassicalDensity{std::move(raw), fields.front(), policy.epsilon, 0.0};
}

double liouville_residual(const PhaseField& density, const PhaseField& hfield) {
  require_same_phase_grid(density.grid(), hfield.grid());
  const PhaseGrid& g = density.grid();
  require(g.nq() >= 3 && g.np() >= 3, ErrorCode::invalid_argument, "Liouville residual needs interior nodes");
  double bracket = 0.0, scale = 0.0;
  const double two_dq = 2 * g.dq(), two_dp = 2 * g.dp();
  for (std::size_t i = 1; i + 1 < g.nq(); ++i)
    for (std::size_t j = 1; j + 1 < g.np(); ++j) {
      const double hq = (hfield.at(i + 1, j) - hfield.at(i - 1, j)) / two_dq;
      const double hp = (hfield.at(i, j + 1) - hfield.at(i, j - 1)) / two_dp;
      const double rq = (density.at(i + 1, j) - density.at(i - 1, j)) / two_dq;
      const double rp = (density.at(i, j + 1) - density.at(i, j - 1)) / two_dp;
      bracket = std::max(bracket, std::abs(hq * rp - hp * rq));
      scale = std::max(scale, std::hypot(hq, hp) * std::hypot(rq, rp));
    }
  return scale > 0 ? bracket / scale : 0.0;
}

double liouville_residual(const ClassicalDensity& density, const PhaseField& hfield) {
  return liouville_residual(density.field, hfield);
}

void write_phase_csv(std::ostream& out, const PhaseField& field) {
  const PhaseGrid& g = field.grid();
  io::write_row(out, {"q", "p", "value"});
  for (std::size_t i = 0; i < g.nq(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j)
      io::write_row(out, {io::format_double(g.q(i)), io::format_double(g.p(j)), io::format_double(field.at(i, j))});
}

void write_phase_binary(const std::filesystem::path& path, const PhaseField& field) {
  const PhaseGrid& g = field.grid();
  require(g.nq() <= UINT32_MAX && g.np() <= UINT32_MAX, ErrorCode::invalid_argument, "phase grid too large");
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::invalid_argument, "cannot write " + path.string());
  char header[32] = {'W', 'P', 'F', '1'};
  const auto nq = static_cast<std::uint32_t>(g.nq()), np = static_cast<std::uint32_t>(g.np());
  const float ranges[4] = {static_cast<float>(g.q_min()), static_cast<float>(g.q_max()),
                           static_cast<float>(g.p_min()), static_cast<float>(g.p_max())};
  std::memcpy(header + 4, &nq, 4);
  std::memcpy(header + 8, &np, 4);
  std::memcpy(header + 12, ranges, 16);
  out.write(header, sizeof header);
  out.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(field.values().size() * sizeof(double)));
}

PhaseField read_phase_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::invalid_argument, "cannot read " + path.string());
  char header[32];
  in.read(header, sizeof header);
  require(in.gcount() == 32 && std::memcmp(header, "WPF1", 4) == 0, ErrorCode::invalid_argument,
          path.string() + " is not a WPF1 phase grid");
  std::uint32_t nq = 0, np = 0;
  float ranges[4];
  std::memcpy(&nq, header + 4, 4);
  std::memcpy(&np, header + 8, 4);
  std::memcpy(ranges, header + 12, 16);
  PhaseGrid grid(ranges[0], ranges[1], nq, ranges[2], ranges[3], np);
  std::vector<double> values(grid.size());
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  require(static_cast<std::size_t>(in.gcount()) == values.size() * sizeof(double), ErrorCode::invalid_argument,
          path.string() + " is truncated");
  return PhaseField(grid, std::move(values));
}

}  // namespace vanhove
