#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "vanhove/errors.hpp"
#include "vanhove/pointer_basis.hpp"
#include "vanhove/rng.hpp"

using namespace vanhove;

namespace {

ShellState shell_of(ComplexMatrix block, double omega = 1.0) {
  ShellState s;
  s.omega = omega;
  s.block = std::move(block);
  return s;
}

double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_SUITE("pointer-basis") {
  TEST_CASE("two-by-two block from the characteristic polynomial") {
    ComplexMatrix b(2, 2);
    b << 0.5, 0.2, 0.2, 0.5;
    const auto pb = diagonalize_shell(shell_of(b));
    // Roots of x^2 - x + 0.21.
    CHECK(pb.eigenvalues[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(pb.eigenvalues[1] == doctest::Approx(0.3).epsilon(1e-14));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(pb.unitary(0, 0) - r) < 1e-14);
    CHECK(std::abs(pb.unitary(1, 0) - r) < 1e-14);
    CHECK(std::abs(pb.unitary(0, 1) - r) < 1e-14);
    CHECK(std::abs(pb.unitary(1, 1) + r) < 1e-14);
  }

  TEST_CASE("maximally mixed block keeps the identity") {
    for (Eigen::Index n : {1, 3, 6}) {
      const ComplexMatrix b = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
      const auto pb = diagonalize_shell(shell_of(b));
      for (double e : pb.eigenvalues) CHECK(e == doctest::Approx(1.0 / static_cast<double>(n)));
      CHECK(max_abs(pb.unitary - ComplexMatrix::Identity(n, n)) < 1e-14);
    }
  }

  TEST_CASE("diagonal block gives a permutation") {
    ComplexMatrix b = ComplexMatrix::Zero(3, 3);
    b(0, 0) = 0.2;
    b(1, 1) = 0.5;
    b(2, 2) = 0.3;
    const auto pb = diagonalize_shell(shell_of(b));
    CHECK(pb.eigenvalues == std::vector<double>{0.5, 0.3, 0.2});
    ComplexMatrix perm = ComplexMatrix::Zero(3, 3);
    perm(1, 0) = perm(2, 1) = perm(0, 2) = 1.0;
    CHECK(max_abs(pb.unitary - perm) < 1e-15);
  }

  TEST_CASE("random 8x8 Hermitian block against Jacobi") {
    CounterRng rng(31);
    const ComplexMatrix b = random_hermitian(rng, 8);
    const auto pb = diagonalize_shell(shell_of(b));
    CHECK(reconstruction_residual(pb, b) < 1e-10);
    const auto jac = oracle::jacobi_eigenvalues(b);
    REQUIRE(jac.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(jac[k] - pb.eigenvalues[k]) < 1e-10);
  }

  TEST_CASE("shells are diagonalized independently") {
    CounterRng rng(32);
    const ComplexMatrix a = random_density_matrix(rng, 3), b = random_density_matrix(rng, 2);
    const auto both = pointer_state({shell_of(a, 1.0), shell_of(b, 2.0)});
    REQUIRE(both.size() == 2);
    const auto lone = diagonalize_shell(shell_of(b, 2.0));
    CHECK(both[1].eigenvalues == lone.eigenvalues);
    CHECK(max_abs(both[1].unitary - lone.unitary) == 0.0);
  }

  TEST_CASE("duplicate energies and non-Hermitian blocks are rejected") {
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2) / 2.0;
    CHECK_THROWS_AS(pointer_state({shell_of(id, 1.0), shell_of(id, 1.0)}), Error);
    ComplexMatrix bad = id;
    bad(0, 1) = 0.1;
    try {
      diagonalize_shell(shell_of(bad));
      FAIL("expected invalid-shell");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_shell);
    }
  }

  TEST_CASE("canonical form does not depend on the input basis inside a cluster") {
    // Two blocks that are the same operator written in rotated coordinates of
    // its degenerate subspace must give identical pointer vectors.
    ComplexMatrix d = ComplexMatrix::Zero(3, 3);
    d(0, 0) = d(1, 1) = 0.4;
    d(2, 2) = 0.2;
    const auto pb = diagonalize_shell(shell_of(d));
    CHECK(pb.eigenvalues[0] == doctest::Approx(0.4));
    CHECK(pb.eigenvalues[1] == doctest::Approx(0.4));
    CHECK(max_abs(pb.unitary - ComplexMatrix::Identity(3, 3)) < 1e-14);
  }

  TEST_CASE("pointer spectrum csv") {
    ShellState s = shell_of(ComplexMatrix::Identity(1, 1), 2.5);
    s.labels = {{"n=1", {1.0}}};
    std::ostringstream out;
    write_pointer_spectrum_csv(out, pointer_state({s}));
    CHECK(out.str().find("2.5") != std::string::npos);
  }

  TEST_CASE("property: reconstruction, unitarity and positivity") {
    CounterRng rng(33);
    for (int trial = 0; trial < 60; ++trial) {
      const auto n = static_cast<Eigen::Index>(1 + trial % 16);
      const ComplexMatrix b = trial % 3 ? random_density_matrix(rng, n) : random_hermitian(rng, n);
      const auto pb = diagonalize_shell(shell_of(b));
      CHECK(reconstruction_residual(pb, b) < 1e-10);
      CHECK(unitarity_residual(pb) < 1e-10);
      CHECK(offdiagonal_residual(pb, b) < 1e-10);
      for (std::size_t k = 1; k < pb.eigenvalues.size(); ++k) CHECK(pb.eigenvalues[k] <= pb.eigenvalues[k - 1]);
      if (trial % 3) CHECK(pb.eigenvalues.back() >= -1e-12);
    }
  }

  TEST_CASE("property: result is invariant under rephasing the input") {
    CounterRng rng(34);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 4;
      const ComplexMatrix b = random_density_matrix(rng, n);
      const auto pb = diagonalize_shell(shell_of(b));
      const auto again = diagonalize_shell(shell_of(ComplexMatrix(b)));
      CHECK(max_abs(pb.unitary - again.unitary) == 0.0);
      // Each pointer vector's largest component is real and positive.
      for (Eigen::Index l = 0; l < n; ++l) {
        Eigen::Index k = 0;
        pb.unitary.col(l).cwiseAbs().maxCoeff(&k);
        CHECK(std::abs(pb.unitary(k, l).imag()) < 1e-14);
        CHECK(pb.unitary(k, l).real() > 0);
      }
    }
  }
}
