// vanhove: run decoherence experiments from JSON configs.
//
//   vanhove evolve --config decay.json --out results/
//   vanhove oracle --config decay.json --threads 4
//
// Exit status: 0 all checks pass, 1 a check or stage failed, 2 config error.
// Times are in inverse energy units (hbar = 1).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vanhove/errors.hpp"
#include "vanhove/harness.hpp"
#include "vanhove/parallel.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "experiment config (JSON)")->required();
  cmd->add_option("--out", opt.out, "output directory (default: config 'output' or ./out)");
  cmd->add_option("--threads", opt.threads, "OpenMP threads (fallback: VANHOVE_THREADS)")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt.seed, "seed for randomized kernels (overrides the config)");
}

int run(const std::string& command, const Options& opt) {
  using namespace vanhove;
  const int threads = opt.threads > 0 ? opt.threads : threads_from_environment();
  set_thread_count(threads);

  harness::ExperimentConfig cfg = harness::load_config(opt.config);
  if (opt.seed) cfg.seed = opt.seed;
  if (command != "oracle" && harness::to_string(cfg.kind) != command)
    fail(ErrorCode::config_error, "/kind: config is '" + harness::to_string(cfg.kind) + "' but the command is '" +
                                      command + "'");
  const std::string out = !opt.out.empty() ? opt.out : cfg.output.value_or("out");

  if (command == "oracle") {
    const auto report = harness::compare_oracle(cfg, out);
    std::cout << (report.pass ? "PASS" : "FAIL") << " oracle " << report.oracle << " cases=" << report.cases
              << " max_abs=" << report.max_abs << " max_rel=" << report.max_rel << " tol=" << report.tolerance << "\n";
    return report.pass ? 0 : 1;
  }
  const auto manifest = harness::run_experiment(cfg, out);
  for (const auto& c : manifest.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " limit=" << c.limit << "\n";
  for (const auto& a : manifest.artifacts) std::cout << "wrote " << out << "/" << a.path << " " << a.sha256 << "\n";
  return manifest.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-induced decoherence experiments"};
  app.require_subcommand(1);
  Options opt;
  for (const char* name : {"evolve", "weak-limit", "wigner", "cosmo", "validate", "oracle"}) {
    CLI::App* cmd = app.add_subcommand(name, std::string("run a config of kind ") + name);
    add_common(cmd, opt);
  }
  app.set_version_flag("--version", VANHOVE_VERSION);
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const vanhove::Error& e) {
    std::cerr << "vanhove " << command << ": " << e.what() << "\n";
    return e.code() == vanhove::ErrorCode::config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "vanhove " << command << ": " << e.what() << "\n";
    return 1;
  }
}
