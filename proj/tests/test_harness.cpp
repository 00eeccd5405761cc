#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "vanhove/descriptors.hpp"
#include "vanhove/errors.hpp"
#include "vanhove/harness.hpp"
#include "vanhove/io.hpp"
#include "vanhove/rng.hpp"

using namespace vanhove;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vanhove_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config_error_message(const std::string& text) {
  try {
    harness::run_experiment(harness::parse_config(text, "."), scratch("err"));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config_error);
    return e.what();
  }
  FAIL("expected config-error");
  return {};
}

const char* kValidate = R"({"kind": "validate", "grid": {"omega_max": 10, "n": 64},
  "state": {"singular": {"type": "gaussian", "mu": 5, "sigma": 1}, "normalize": true}})";

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("counter stream is reproducible and addressable") {
    CounterRng a(2024), b(2024);
    std::vector<std::uint64_t> xs;
    for (int k = 0; k < 5; ++k) xs.push_back(a.next_u64());
    for (int k = 0; k < 5; ++k) CHECK(b.at(static_cast<std::uint64_t>(k)) == xs[static_cast<std::size_t>(k)]);
    CounterRng skip(2024, 3);
    CHECK(skip.next_u64() == xs[3]);
    // splitmix64 of seed 0: first output is the published reference value.
    CHECK(CounterRng(0).next_u64() == 0xE220A8397B1DCDAFULL);
    CounterRng u(9);
    for (int k = 0; k < 1000; ++k) {
      const double x = u.uniform();
      CHECK(x >= 0.0);
      CHECK(x < 1.0);
    }
  }

  TEST_CASE("normal draws have unit variance") {
    CounterRng r(77);
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
      const double x = r.normal();
      s += x;
      s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.03);
    CHECK(std::abs(s2 / n - 1.0) < 0.05);
  }

  TEST_CASE("random matrices have their advertised structure") {
    CounterRng r(5);
    const ComplexMatrix rho = random_density_matrix(r, 6);
    CHECK(std::abs(rho.trace() - complex(1.0)) < 1e-14);
    CHECK((rho - ComplexMatrix(rho.adjoint())).cwiseAbs().maxCoeff() < 1e-15);
    const ComplexMatrix u = random_unitary(r, 6);
    CHECK((u.adjoint() * u - ComplexMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("format and checksum helpers") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(2.0) == "2");
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    std::ostringstream out;
    io::write_row(out, {"a", "b"});
    CHECK(out.str() == "a,b\n");
  }

  TEST_CASE("descriptors build the documented kernels") {
    const auto g = make_grid(10.0, 11, QuadratureScheme::uniform);
    config::DescriptorContext ctx;
    const config::json point = {{"type", "point"}, {"omega", 3.0}};
    const auto k = config::parse_singular(config::ObjectReader(point, "/s"), g, ctx);
    CHECK(k[3] == complex(1.0));
    const config::json uniform = {{"type", "uniform"}};
    const auto u = config::parse_singular(config::ObjectReader(uniform, "/s"), g, ctx);
    CHECK(u[0].real() == doctest::Approx(0.1));
    const config::json lor = {{"type", "lorentzian"}, {"center", 5.0}, {"gamma", 1.0}};
    const auto l = config::parse_singular(config::ObjectReader(lor, "/s"), g, ctx);
    CHECK(l[5].real() == doctest::Approx(1.0 / std::numbers::pi));
  }

  TEST_CASE("unknown fields are reported by path") {
    const std::string msg = config_error_message(R"({"kind": "validate", "grid": {"omega_max": 10, "n": 8, "nn": 3},
      "state": {"singular": {"type": "identity"}}})");
    CHECK(msg.find("/grid/nn") != std::string::npos);
    CHECK(msg.find("unknown field") != std::string::npos);
    const std::string top = config_error_message(R"({"kind": "validate", "grid": {"omega_max": 10, "n": 8},
      "state": {"singular": {"type": "identity"}}, "extra": 1})");
    CHECK(top.find("/extra") != std::string::npos);
  }

  TEST_CASE("missing fields, bad kinds and malformed json are config errors") {
    CHECK(config_error_message(R"({"kind": "validate", "grid": {"n": 8}, "state": {}})").find("/grid/omega_max") !=
          std::string::npos);
    CHECK_THROWS_AS(harness::parse_config(R"({"kind": "teleport"})", "."), Error);
    try {
      harness::parse_config("{\n  \"kind\": \"validate\",\n  oops\n}", ".", "cfg.json");
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config_error);
      CHECK(std::string(e.what()).find("cfg.json:3:") != std::string::npos);
    }
  }

  TEST_CASE("randomized descriptors need a seed") {
    const std::string msg = config_error_message(R"({"kind": "validate", "grid": {"omega_max": 10, "n": 8},
      "state": {"singular": {"type": "random"}, "normalize": true}})");
    CHECK(msg.find("seed") != std::string::npos);
  }

  TEST_CASE("config hash ignores the output location but not the seed") {
    const std::string a = R"({"kind": "validate", "seed": 1, "output": "x", "grid": {"omega_max": 1, "n": 2},
      "state": {"singular": {"type": "identity"}}})";
    const std::string b = R"({"output": "y", "seed": 1, "kind": "validate", "grid": {"n": 2, "omega_max": 1},
      "state": {"singular": {"type": "identity"}}})";
    const std::string c = R"({"kind": "validate", "seed": 2, "grid": {"omega_max": 1, "n": 2},
      "state": {"singular": {"type": "identity"}}})";
    const auto ha = harness::config_hash(harness::parse_config(a, "."));
    CHECK(ha == harness::config_hash(harness::parse_config(b, ".")));
    CHECK(ha != harness::config_hash(harness::parse_config(c, ".")));
    CHECK(ha.size() == 64);
  }

  TEST_CASE("validate run writes a report and a manifest") {
    const auto dir = scratch("validate");
    const auto m = harness::run_experiment(harness::parse_config(kValidate, "."), dir);
    CHECK(m.passed());
    REQUIRE(m.artifacts.size() == 1);
    CHECK(m.artifacts[0].path == "report.json");
    CHECK(m.artifacts[0].sha256 == io::sha256_file(dir / "report.json"));
    std::ifstream in(dir / "manifest.json");
    const auto manifest = harness::json::parse(in);
    CHECK(manifest["status"] == "pass");
    CHECK(manifest["kind"] == "validate");
  }

  TEST_CASE("unnormalized state fails validation with the residual named") {
    const auto dir = scratch("unnormalized");
    const auto m = harness::run_experiment(harness::parse_config(R"({"kind": "validate",
      "grid": {"omega_max": 10, "n": 64}, "state": {"singular": {"type": "uniform", "amplitude": 0.2}}})", "."), dir);
    CHECK_FALSE(m.passed());
    std::ifstream in(dir / "report.json");
    const auto report = harness::json::parse(in);
    CHECK(report["violations"][0]["invariant"] == "normalization");
    CHECK(report["violations"][0]["residual"].get<double>() == doctest::Approx(1.0));
  }

  TEST_CASE("evolve run produces a decaying profile") {
    const auto dir = scratch("evolve");
    const auto m = harness::run_experiment(harness::parse_config(R"({"kind": "evolve",
      "grid": {"omega_max": 10, "n": 512},
      "state": {"singular": {"type": "gaussian", "mu": 5, "sigma": 0.5},
                "regular": {"type": "gaussian", "mu": 5, "sigma": 0.5, "amplitude": 0.2}, "normalize": true},
      "observable": {"singular": {"type": "hamiltonian"}, "regular": {"type": "gaussian", "mu": 5, "sigma": 0.5}},
      "times": {"start": 0, "stop": 10, "count": 101}, "envelope": {"floor": 1e-9, "t_max": 8}})", "."), dir);
    CHECK(m.passed());
    const auto table = io::read_numeric_csv(dir / "decay.csv");
    CHECK(table.header == std::vector<std::string>{"t", "offdiag_abs", "expectation"});
    REQUIRE(table.rows.size() == 101);
    for (std::size_t k = 1; k < table.rows.size(); ++k) CHECK(table.rows[k][1] <= table.rows[k - 1][1] + 1e-15);
    std::ifstream in(dir / "summary.json");
    const auto summary = harness::json::parse(in);
    CHECK(summary["envelope"]["rate"].get<double>() == doctest::Approx(0.125).epsilon(0.05));
  }

  TEST_CASE("cosmo run with constant potential reproduces the line") {
    const auto dir = scratch("cosmo");
    const auto m = harness::run_experiment(harness::parse_config(R"({"kind": "cosmo",
      "potential": {"family": "constant", "lambda": 0.5, "a1": 2.0},
      "scale_factor": {"a0": 0.0, "branch": 1, "eta_max": 3.0, "tol": 1e-11, "samples": 61},
      "modes": {"k": [1.0, 2.0], "m": 0.0, "a_out": 10.0, "n_max": 2},
      "state": {"type": "thermal", "beta": 1.0}})", "."), dir);
    CHECK(m.passed());
    const auto table = io::read_numeric_csv(dir / "scale_factor.csv");
    for (const auto& row : table.rows) CHECK(std::abs(row[1] - std::min(2.0, row[0])) < 1e-8);
  }

  TEST_CASE("oracle comparison on a seeded pairing config") {
    const auto dir = scratch("oracle");
    const auto report = harness::compare_oracle(harness::parse_config(R"({"kind": "evolve", "seed": 3,
      "grid": {"omega_max": 10, "n": 64},
      "state": {"singular": {"type": "random"}, "regular": {"type": "random"}, "normalize": true},
      "observable": {"singular": {"type": "identity"}}, "times": {"values": [0, 1, 5]}})", "."), dir);
    CHECK(report.pass);
    CHECK(report.max_abs == 0.0);  // identity: both sides reduce to the trace
    CHECK(fs::exists(dir / "oracle.json"));
  }

  TEST_CASE("oracle refuses oversize instances") {
    try {
      harness::compare_oracle(harness::parse_config(R"({"kind": "validate", "grid": {"omega_max": 10, "n": 5000},
        "state": {"singular": {"type": "identity"}}})", "."), scratch("big"));
      FAIL("expected size-limit");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::size_limit);
    }
  }

  TEST_CASE("module errors name their stage") {
    try {
      harness::run_experiment(harness::parse_config(R"({"kind": "wigner",
        "grid": {"omega_max": 10, "n": 101},
        "state": {"singular": {"type": "gaussian", "mu": 3, "sigma": 0.5}, "normalize": true},
        "observable": {"singular": {"type": "hamiltonian"}},
        "phase_grid": {"q_min": -4, "q_max": 4, "nq": 21, "p_min": -4, "p_max": 4, "np": 21},
        "hamiltonian": {"type": "harmonic"}, "epsilon": 1e-3})", "."),
                              scratch("stage"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("stage '") != std::string::npos);
    }
  }

  TEST_CASE("property: seeded runs are byte identical") {
    const std::string text = R"({"kind": "weak-limit", "seed": 11, "grid": {"omega_max": 8, "n": 96},
      "state": {"singular": {"type": "random"}, "regular": {"type": "random", "amplitude": 0.1}, "normalize": true},
      "observable": {"singular": {"type": "random"}, "regular": {"type": "random"}},
      "times": {"start": 0, "stop": 50, "count": 26}})";
    const auto cfg = harness::parse_config(text, ".");
    const auto a = harness::run_experiment(cfg, scratch("seed_a"));
    const auto b = harness::run_experiment(cfg, scratch("seed_b"));
    REQUIRE(a.artifacts.size() == b.artifacts.size());
    for (std::size_t k = 0; k < a.artifacts.size(); ++k) CHECK(a.artifacts[k].sha256 == b.artifacts[k].sha256);
    const auto other = harness::run_experiment(harness::parse_config(
        std::string(text).replace(text.find("11"), 2, "12"), "."), scratch("seed_c"));
    CHECK(other.artifacts[0].sha256 != a.artifacts[0].sha256);
  }
}
