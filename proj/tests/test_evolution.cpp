#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vanhove/evolution.hpp"
#include "vanhove/reference.hpp"

using namespace vanhove;

TEST_SUITE("evolution") {
  TEST_CASE("t = 0 leaves the state unchanged") {
    const auto g = make_grid(10.0, 32, QuadratureScheme::uniform);
    const auto rho = fixtures::gaussian_state(g);
    const auto moved = evolve(rho, 0.0);
    CHECK(moved.regular().values() == rho.regular().values());
    CHECK(moved.singular().values() == rho.singular().values());
  }

  TEST_CASE("diagonal entries carry no phase") {
    CounterRng rng(21);
    const auto g = make_grid(10.0, 24, QuadratureScheme::chebyshev);
    const auto rho = fixtures::random_state(g, rng);
    const auto moved = evolve(rho, 3.7);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(moved.regular()(i, i) == rho.regular()(i, i));
  }

  TEST_CASE("half period flips the sign of a coherence") {
    // Grid with spacing pi so that w_i - w_j = pi for neighbours.
    const auto g = make_grid(std::numbers::pi * 4, 5, QuadratureScheme::uniform);
    ComplexMatrix r = ComplexMatrix::Zero(5, 5);
    r(2, 1) = 1.0;
    const StateFunctional rho(SingularKernel::zero(g), RegularKernel(g, r));
    const auto moved = evolve(rho, 1.0);
    CHECK(std::abs(moved.regular()(2, 1) - complex(-1.0)) < 1e-15);
  }

  TEST_CASE("purely singular observable is time independent") {
    CounterRng rng(22);
    const auto g = make_grid(10.0, 48, QuadratureScheme::uniform);
    const auto rho = fixtures::random_state(g, rng);
    const Observable obs(hamiltonian_observable(g).singular(), RegularKernel::zero(g));
    const double v0 = expectation(rho, obs, 0.0);
    for (double t : {0.5, 7.0, 123.0}) CHECK(std::abs(expectation(rho, obs, t) - v0) < 1e-12);
  }

  TEST_CASE("expectation at t = 0 is the pairing") {
    CounterRng rng(23);
    const auto g = make_grid(10.0, 40, QuadratureScheme::chebyshev);
    const auto rho = fixtures::random_state(g, rng);
    const auto obs = fixtures::random_observable(g, rng);
    CHECK(std::abs(expectation(rho, obs, 0.0) - pair_real(rho, obs)) < 1e-12);
  }

  TEST_CASE("property: factorized series matches per-entry phases") {
    CounterRng rng(24);
    const auto g = make_grid(10.0, 96, QuadratureScheme::uniform);
    const auto rho = fixtures::random_state(g, rng);
    const auto obs = fixtures::random_observable(g, rng);
    const ExpectationSeries series(rho, obs);
    for (double t : {0.0, 0.1, 1.0, 17.0, 250.0, 1000.0}) {
      const complex per_entry = reference::expectation(rho, obs, t);
      CHECK(std::abs(series.at(t) - per_entry) < 1e-11);
      CHECK(std::abs(pair(evolve(rho, t), obs) - per_entry) < 1e-11);
    }
  }

  TEST_CASE("coherences decay to the weak limit") {
    const auto g = make_grid(10.0, 2048, QuadratureScheme::uniform);
    const auto rho = fixtures::gaussian_state(g);
    const auto obs = fixtures::gaussian_observable(g);
    const double diag = pair_real(weak_limit(rho), obs);
    const double off0 = std::abs(expectation(rho, obs, 0.0) - diag);
    REQUIRE(off0 > 1e-3);
    CHECK(std::abs(expectation(rho, obs, 20.0) - diag) < 1e-3 * off0);
    for (double t : {25.0, 40.0, 300.0}) CHECK(std::abs(expectation(rho, obs, t) - diag) < 1e-6);
  }

  TEST_CASE("off-diagonal magnitude agrees with a fine-grid quadrature") {
    // Continuum value of the regular term from a very fine Simpson rule.
    const auto g = make_grid(10.0, 2048, QuadratureScheme::uniform);
    const auto rho = fixtures::gaussian_state(g);
    const auto obs = fixtures::gaussian_observable(g);
    const double diag = pair_real(weak_limit(rho), obs);
    for (double t : {0.0, 1.0, 2.5, 4.0}) {
      const double ref = oracle::gaussian_offdiag(0.2, 5.0, 0.5, 1.0, 5.0, 0.5, 10.0, t);
      CHECK(std::abs(std::abs(expectation(rho, obs, t) - diag) - ref) < 1e-6 * std::max(1.0, ref));
    }
  }

  TEST_CASE("weak limit is a fixed point and orthogonal to regular observables") {
    CounterRng rng(25);
    const auto g = make_grid(10.0, 30, QuadratureScheme::uniform);
    const auto rho = fixtures::random_state(g, rng);
    const auto star = weak_limit(rho);
    CHECK(star.regular().is_zero());
    CHECK(weak_limit(star).singular().values() == star.singular().values());
    const Observable reg_only(SingularKernel::zero(g), fixtures::random_observable(g, rng).regular());
    CHECK(pair_real(star, reg_only) == 0.0);
  }

  TEST_CASE("decay profile of a singular state is flat zero") {
    const auto g = make_grid(10.0, 64, QuadratureScheme::uniform);
    const StateFunctional rho(fixtures::normalized(g, fixtures::gaussian(*g, 5.0, 1.0)), RegularKernel::zero(g));
    const std::vector<double> times = {0.0, 1.0, 2.0, 5.0};
    const auto profile = decay_profile(rho, fixtures::gaussian_observable(g), times);
    for (double v : profile.offdiag_abs) CHECK(v <= 1e-12);
    CHECK_FALSE(decoherence_time(profile, 0.01).has_value());
  }

  TEST_CASE("decay profile at t = 0 is the coherent contribution") {
    const auto g = make_grid(10.0, 256, QuadratureScheme::uniform);
    const auto rho = fixtures::gaussian_state(g);
    const auto obs = fixtures::gaussian_observable(g);
    const std::vector<double> times = {0.0};
    const auto profile = decay_profile(rho, obs, times);
    CHECK(std::abs(profile.offdiag_abs[0] - std::abs(pair_real(rho, obs) - pair_real(weak_limit(rho), obs))) < 1e-14);
  }

  TEST_CASE("decoherence time on a constructed profile") {
    DecayProfile p;
    p.times = {0.0, 1.0, 2.0};
    p.offdiag_abs = {1.0, 0.5, 0.01};
    p.expectation = {0.0, 0.0, 0.0};
    CHECK(decoherence_time(p, 0.1) == 2.0);
  }

  TEST_CASE("fitted envelope rate and decoherence time match the closed form") {
    const auto g = make_grid(10.0, 2048, QuadratureScheme::uniform);
    const auto rho = fixtures::gaussian_state(g);
    const auto obs = fixtures::gaussian_observable(g);
    std::vector<double> times;
    for (int k = 0; k <= 300; ++k) times.push_back(0.05 * k);
    const auto profile = decay_profile(rho, obs, times);
    const auto fit = fit_gaussian_envelope(profile, 1e-9, 8.0);
    const double rate = oracle::gaussian_decay_rate(0.5, 0.5);
    CHECK(std::abs(fit.rate - rate) < 0.05 * rate);
    CHECK(fit.r_squared > 0.999);
    const auto td = decoherence_time(profile, 1e-2);
    REQUIRE(td.has_value());
    const double predicted = std::sqrt(std::log(100.0) / fit.rate);
    CHECK(std::abs(*td - predicted) < 0.1 * predicted);
  }

  TEST_CASE("decay csv has the documented header") {
    DecayProfile p;
    p.times = {0.0, 0.5};
    p.offdiag_abs = {1.0, 0.25};
    p.expectation = {2.0, 1.5};
    std::ostringstream out;
    write_decay_csv(out, p);
    CHECK(out.str() == "t,offdiag_abs,expectation\n0,1,2\n0.5,0.25,1.5\n");
  }

  TEST_CASE("property: evolution preserves trace and energy") {
    CounterRng rng(26);
    for (int trial = 0; trial < 25; ++trial) {
      const auto g = make_grid(10.0, 4 + static_cast<std::size_t>(trial) * 2,
                               trial % 2 ? QuadratureScheme::chebyshev : QuadratureScheme::uniform);
      const auto rho = fixtures::random_state(g, rng);
      const double e0 = pair_real(rho, hamiltonian_observable(g));
      for (int k = 0; k < 5; ++k) {
        const double t = rng.uniform(-50.0, 50.0);
        const auto moved = evolve(rho, t);
        CHECK(std::abs(pair_real(moved, identity_observable(g)) - 1.0) <= 1e-12);
        CHECK(std::abs(pair_real(moved, hamiltonian_observable(g)) - e0) <= 1e-12);
      }
    }
  }

  TEST_CASE("property: evolution composes as a group") {
    CounterRng rng(27);
    const auto g = make_grid(10.0, 20, QuadratureScheme::chebyshev);
    const auto rho = fixtures::random_state(g, rng);
    const auto two_step = evolve(evolve(rho, 1.25), 2.5);
    const auto one_step = evolve(rho, 3.75);
    CHECK((two_step.regular().values() - one_step.regular().values()).cwiseAbs().maxCoeff() < 1e-13);
    const auto back = evolve(evolve(rho, 4.0), -4.0);
    CHECK((back.regular().values() - rho.regular().values()).cwiseAbs().maxCoeff() < 1e-13);
  }
}
