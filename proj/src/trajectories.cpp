#include "vanhove/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vanhove/errors.hpp"
#include "vanhove/io.hpp"
#include "vanhove/parallel.hpp"

namespace vanhove {

double TrajectoryEnsemble::total_probability() const {
  std::vector<double> p;
  p.reserve(entries.size());
  for (const auto& e : entries) p.push_back(e.probability);
  return pairwise_sum<double>(p);
}

namespace {

double invariant_value(const InvariantField& inv, const PointerBasis& basis, std::size_t l) {
  if (inv.source == InvariantField::Source::energy) return basis.omega;
  const auto col = basis.unitary.col(static_cast<Eigen::Index>(l));
  double s = 0.0;
  for (Eigen::Index k = 0; k < col.size(); ++k) {
    const auto& label = basis.labels.at(static_cast<std::size_t>(k));
    require(inv.coordinate < label.values.size(), ErrorCode::invalid_argument,
            "label '" + label.name + "' has no coordinate " + std::to_string(inv.coordinate));
    s += std::norm(col(k)) * label.values[inv.coordinate];
  }
  return s;
}

double concentration(const PhaseField& component, std::span<const PhaseField> fields, std::span<const double> l,
                     double a0, double eps) {
  const PhaseGrid& g = component.grid();
  std::vector<double> inside(g.size(), 0.0);
  for (std::size_t i = 0; i < g.nq(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j) {
      const std::size_t node = g.index(i, j);
      bool ok = std::abs(g.q(i) - a0) <= 3 * eps;
      for (std::size_t f = 0; f < fields.size() && ok; ++f) ok = std::abs(fields[f].values()[node] - l[f]) <= 3 * eps;
      if (ok) inside[node] = component.values()[node];
    }
  return phase_space_mass(PhaseField(g, std::move(inside))) / phase_space_mass(component);
}

}  // namespace

TrajectoryResult trajectory_ensemble(const std::vector<PointerBasis>& pointer,
                                     const std::vector<InvariantField>& invariants, const MollifierPolicy& policy,
                                     std::span<const double> a0_points) {
  require(!invariants.empty(), ErrorCode::invalid_argument, "need at least one invariant field");
  require(!a0_points.empty(), ErrorCode::invalid_argument, "need at least one a0 point");
  require(policy.epsilon > 0, ErrorCode::invalid_argument, "mollifier epsilon must be positive");
  const PhaseGrid& grid = invariants.front().field.grid();
  std::vector<PhaseField> fields;
  for (const auto& inv : invariants) {
    require(inv.field.grid() == grid, ErrorCode::incompatible_grids, "invariant fields live on different grids");
    fields.push_back(inv.field);
  }
  const double eps = policy.epsilon;
  const double norm = 1.0 / (eps * std::sqrt(2.0 * std::numbers::pi));
  const double share = 1.0 / static_cast<double>(a0_points.size());

  TrajectoryResult out{{}, ClassicalDensity{PhaseField(grid, std::vector<double>(grid.size(), 0.0)),
                                            invariants.front().field, eps, 0.0},
                       {}};
  for (const auto& basis : pointer)
    for (std::size_t l = 0; l < basis.eigenvalues.size(); ++l) {
      double lambda = basis.eigenvalues[l];
      require(lambda >= -1e-12, ErrorCode::invalid_argument, "pointer eigenvalue is negative");
      lambda = std::max(lambda, 0.0);
      std::vector<double> l_values;
      for (const auto& inv : invariants) l_values.push_back(invariant_value(inv, basis, l));
      const PhaseField product = mollified_product(l_values, fields, policy);

      for (double a0 : a0_points) {
        TrajectoryEntry entry;
        entry.omega = basis.omega;
        entry.l_index = l;
        entry.l_values = l_values;
        entry.a0 = a0;
        entry.probability = basis.weight * lambda * share;

        PhaseField component = product;
        for (std::size_t i = 0; i < grid.nq(); ++i) {
          const double z = (grid.q(i) - a0) / eps;
          const double f = norm * std::exp(-0.5 * z * z);
          for (std::size_t j = 0; j < grid.np(); ++j) component.values()[grid.index(i, j)] *= f;
        }
        const double mass = phase_space_mass(component);
        if (!(mass >= 1e-6)) {
          std::ostringstream msg;
          msg << "degenerate support (mass " << mass << ")";
          entry.degenerate = true;
          entry.note = msg.str();
          out.density.leakage += entry.probability;
          std::fill(component.values().begin(), component.values().end(), 0.0);
        } else {
          for (double& v : component.values()) v /= mass;
          entry.concentration = concentration(component, fields, l_values, a0, eps);
          for (std::size_t k = 0; k < grid.size(); ++k)
            out.density.field.values()[k] += entry.probability * component.values()[k];
        }
        out.ensemble.entries.push_back(std::move(entry));
        out.components.push_back(std::move(component));
      }
    }
  return out;
}

namespace {

struct Gradient {
  PhaseField dq, dp;
};

Gradient gradient(const PhaseField& h) {
  const PhaseGrid& g = h.grid();
  std::vector<double> gq(g.size()), gp(g.size());
  for (std::size_t i = 0; i < g.nq(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j) {
      const std::size_t im = i ? i - 1 : i, ip = i + 1 < g.nq() ? i + 1 : i;
      const std::size_t jm = j ? j - 1 : j, jp = j + 1 < g.np() ? j + 1 : j;
      gq[g.index(i, j)] = (h.at(ip, j) - h.at(im, j)) / (g.q(ip) - g.q(im));
      gp[g.index(i, j)] = (h.at(i, jp) - h.at(i, jm)) / (g.p(jp) - g.p(jm));
    }
  return {PhaseField(g, std::move(gq)), PhaseField(g, std::move(gp))};
}

}  // namespace

PhaseField transport(const PhaseField& density, const PhaseField& hfield, double eta, std::size_t steps) {
  require(density.grid() == hfield.grid(), ErrorCode::incompatible_grids, "density and H live on different grids");
  require(steps >= 1 && std::isfinite(eta), ErrorCode::invalid_argument, "transport needs finite eta and steps >= 1");
  if (eta == 0.0) return density;
  const PhaseGrid& g = density.grid();
  const Gradient grad = gradient(hfield);
  const double h = -eta / static_cast<double>(steps);  // backwards in time
  std::vector<double> out(g.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < g.nq(); ++i)
    for (std::size_t j = 0; j < g.np(); ++j) {
      double q = g.q(i), p = g.p(j);
      const auto flow = [&](double x, double y, double& fq, double& fp) {
        fq = grad.dp.interpolate(x, y);
        fp = -grad.dq.interpolate(x, y);
      };
      for (std::size_t s = 0; s < steps; ++s) {
        double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
        flow(q, p, k1q, k1p);
        flow(q + 0.5 * h * k1q, p + 0.5 * h * k1p, k2q, k2p);
        flow(q + 0.5 * h * k2q, p + 0.5 * h * k2p, k3q, k3p);
        flow(q + h * k3q, p + h * k3p, k4q, k4p);
        q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
        p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
      }
      const bool outside = q < g.q_min() || q > g.q_max() || p < g.p_min() || p > g.p_max();
      out[g.index(i, j)] = outside ? 0.0 : density.interpolate(q, p);
    }
  return PhaseField(g, std::move(out));
}

RidgeFit fit_ridge(const PhaseField& component, const PhaseField& hfield, std::span<const double> etas,
                   std::size_t steps) {
  require(etas.size() >= 3, ErrorCode::invalid_argument, "ridge fit needs at least three times");
  const PhaseGrid& g = component.grid();
  RidgeFit fit;
  fit.eta.assign(etas.begin(), etas.end());
  for (double eta : etas) {
    const PhaseField moved = transport(component, hfield, eta, steps);
    std::vector<double> marginal(g.nq());
    for (std::size_t i = 0; i < g.nq(); ++i)
      marginal[i] = pairwise_reduce<double>(0, g.np(), [&](std::size_t j) { return g.node_weight(i, j) * moved.at(i, j); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < g.nq(); ++i)
      if (marginal[i] > marginal[best]) best = i;
    double q = g.q(best);
    if (best > 0 && best + 1 < g.nq()) {
      const double m0 = marginal[best - 1], m1 = marginal[best], m2 = marginal[best + 1];
      const double curv = m0 - 2 * m1 + m2;
      if (curv < 0) q += 0.5 * (m0 - m2) / curv * g.dq();
    }
    fit.q.push_back(q);
  }
  const double n = static_cast<double>(etas.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < etas.size(); ++k) {
    const double x = fit.eta[k], y = fit.q[k];
    sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
  }
  const double varx = sxx - sx * sx / n, vary = syy - sy * sy / n, cov = sxy - sx * sy / n;
  require(varx > 0, ErrorCode::invalid_argument, "ridge fit needs distinct times");
  fit.slope = cov / varx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r_squared = vary > 0 ? std::min(1.0, cov * cov / (varx * vary)) : 1.0;
  return fit;
}

void write_ensemble_csv(std::ostream& out, const TrajectoryEnsemble& ensemble) {
  io::write_row(out, {"component", "l_values", "a0", "probability"});
  for (std::size_t c = 0; c < ensemble.entries.size(); ++c) {
    const auto& e = ensemble.entries[c];
    std::string ls;
    for (std::size_t k = 0; k < e.l_values.size(); ++k) {
      if (k) ls += ';';
      ls += io::format_double(e.l_values[k]);
    }
    io::write_row(out, {std::to_string(c), ls, io::format_double(e.a0), io::format_double(e.probability)});
  }
}

}  // namespace vanhove
