#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vanhove/trajectories.hpp"

using namespace vanhove;

namespace {

PointerBasis diagonal_pointer(double omega, std::vector<double> eigenvalues, std::vector<LabelDescriptor> labels) {
  ShellState s;
  s.omega = omega;
  s.labels = std::move(labels);
  const auto n = static_cast<Eigen::Index>(eigenvalues.size());
  s.block = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) s.block(k, k) = eigenvalues[static_cast<std::size_t>(k)];
  return diagonalize_shell(s);
}

}  // namespace

TEST_SUITE("trajectories") {
  TEST_CASE("single shell of the free Hamiltonian sits on p = +-2 through a0") {
    const PhaseGrid pg(-3, 3, 121, -3, 3, 121);
    const std::vector<PointerBasis> pointer = {diagonal_pointer(2.0, {1.0}, {{"n=1", {1.0}}})};
    const std::vector<InvariantField> inv = {{free_hamiltonian(pg), InvariantField::Source::energy, 0}};
    const std::vector<double> a0 = {0.5};
    const auto res = trajectory_ensemble(pointer, inv, MollifierPolicy{0.2}, a0);
    REQUIRE(res.ensemble.entries.size() == 1);
    CHECK(res.ensemble.entries[0].l_values == std::vector<double>{2.0});
    const auto& f = res.density.field;
    std::size_t best = 0;
    for (std::size_t k = 1; k < pg.size(); ++k)
      if (f.values()[k] > f.values()[best]) best = k;
    CHECK(std::abs(pg.q(best / pg.np()) - 0.5) <= pg.dq());
    CHECK(std::abs(std::abs(pg.p(best % pg.np())) - 2.0) <= pg.dp());
    // Both momentum branches carry equal weight.
    CHECK(f.at(best / pg.np(), best % pg.np()) ==
          doctest::Approx(f.at(best / pg.np(), pg.np() - 1 - best % pg.np())).epsilon(1e-12));
  }

  TEST_CASE("probabilities follow the pointer spectrum and a0 points share evenly") {
    const PhaseGrid pg(-4, 4, 161, -2, 2, 81);
    const std::vector<PointerBasis> pointer = {
        diagonal_pointer(0.5, {0.7, 0.3}, {{"a", {1.0}}, {"b", {-1.0}}})};
    const std::vector<InvariantField> inv = {{momentum_field(pg), InvariantField::Source::label, 0}};
    const std::vector<double> a0 = {-1.0, 1.0};
    const auto res = trajectory_ensemble(pointer, inv, MollifierPolicy{0.15}, a0);
    REQUIRE(res.ensemble.entries.size() == 4);
    CHECK(std::abs(res.ensemble.total_probability() - 1.0) < 1e-12);
    CHECK(res.ensemble.entries[0].probability == doctest::Approx(0.35));
    CHECK(res.ensemble.entries[2].probability == doctest::Approx(0.15));
    CHECK(res.ensemble.entries[2].l_values == std::vector<double>{-1.0});
    for (const auto& c : res.components) CHECK(std::abs(phase_space_mass(c) - 1.0) < 1e-12);
    for (const auto& e : res.ensemble.entries) CHECK(e.concentration >= 0.99);
    CHECK(std::abs(phase_space_mass(res.density.field) - 1.0) < 1e-12);
  }

  TEST_CASE("label values average over mixed pointer vectors") {
    ShellState s;
    s.omega = 1.0;
    s.labels = {{"x", {2.0}}, {"y", {0.0}}};
    s.block = ComplexMatrix(2, 2);
    s.block << 0.5, 0.2, 0.2, 0.5;
    const std::vector<PointerBasis> pointer = {diagonalize_shell(s)};
    const PhaseGrid pg(-3, 3, 61, -1, 3, 81);
    const std::vector<InvariantField> inv = {{momentum_field(pg), InvariantField::Source::label, 0}};
    const std::vector<double> a0 = {0.0};
    const auto res = trajectory_ensemble(pointer, inv, MollifierPolicy{0.2}, a0);
    for (const auto& e : res.ensemble.entries) CHECK(e.l_values[0] == doctest::Approx(1.0));
  }

  TEST_CASE("entries that miss the grid are flagged and leak") {
    const PhaseGrid pg(-2, 2, 41, -1, 1, 41);
    const std::vector<PointerBasis> pointer = {diagonal_pointer(0.5, {0.6, 0.4}, {{"in", {0.5}}, {"out", {9.0}}})};
    const std::vector<InvariantField> inv = {{momentum_field(pg), InvariantField::Source::label, 0}};
    const std::vector<double> a0 = {0.0};
    const auto res = trajectory_ensemble(pointer, inv, MollifierPolicy{0.1}, a0);
    REQUIRE(res.ensemble.entries.size() == 2);
    CHECK_FALSE(res.ensemble.entries[0].degenerate);
    CHECK(res.ensemble.entries[1].degenerate);
    CHECK(res.ensemble.entries[1].note.find("degenerate") != std::string::npos);
    CHECK(res.density.leakage == doctest::Approx(0.4));
    CHECK(std::abs(res.ensemble.total_probability() - 1.0) < 1e-12);
  }

  TEST_CASE("free transport shifts a blob by p eta") {
    const PhaseGrid pg(-3, 5, 321, -1, 2, 121);
    const PhaseField h = free_hamiltonian(pg);
    const PhaseField blob = sample_field(pg, [](double q, double p) {
      return std::exp(-0.5 * (q * q + (p - 1) * (p - 1)) / 0.04);
    });
    const PhaseField moved = transport(blob, h, 2.0);
    std::size_t best = 0;
    for (std::size_t k = 1; k < pg.size(); ++k)
      if (moved.values()[k] > moved.values()[best]) best = k;
    CHECK(std::abs(pg.q(best / pg.np()) - 2.0) <= pg.dq());
    CHECK(std::abs(pg.p(best % pg.np()) - 1.0) <= pg.dp());
    CHECK(transport(blob, h, 0.0).values() == blob.values());
  }

  TEST_CASE("property: ridges are straight lines with slope l") {
    const PhaseGrid pg(-3, 5, 321, -1.5, 2, 141);
    const PhaseField h = free_hamiltonian(pg);
    const std::vector<PointerBasis> pointer = {
        diagonal_pointer(0.5, {0.5, 0.5}, {{"fast", {1.2}}, {"slow", {0.4}}})};
    const std::vector<InvariantField> inv = {{momentum_field(pg), InvariantField::Source::label, 0}};
    const std::vector<double> a0 = {-1.0};
    const double eps = 0.15;
    const auto res = trajectory_ensemble(pointer, inv, MollifierPolicy{eps}, a0);
    std::vector<double> etas;
    for (int k = 0; k <= 8; ++k) etas.push_back(0.25 * k);
    for (std::size_t c = 0; c < res.components.size(); ++c) {
      const auto fit = fit_ridge(res.components[c], h, etas);
      CHECK(fit.r_squared > 0.999);
      CHECK(std::abs(fit.slope - res.ensemble.entries[c].l_values[0]) < eps);
      CHECK(std::abs(fit.intercept + 1.0) < eps);
    }
  }

  TEST_CASE("ensemble csv") {
    TrajectoryEnsemble e;
    TrajectoryEntry a;
    a.l_values = {1.0, 0.5};
    a.a0 = -1.0;
    a.probability = 0.25;
    e.entries.push_back(a);
    std::ostringstream out;
    write_ensemble_csv(out, e);
    CHECK(out.str() == "component,l_values,a0,probability\n0,1;0.5,-1,0.25\n");
  }
}
