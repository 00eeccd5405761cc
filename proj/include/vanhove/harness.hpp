#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vanhove::harness {

using json = nlohmann::json;

enum class Kind { evolve, weak_limit, wigner, cosmo, validate };

std::string to_string(Kind kind);
std::optional<Kind> parse_kind(const std::string& name);

struct ExperimentConfig {
  Kind kind = Kind::evolve;
  json document;                     // parsed config, kind included
  std::filesystem::path base_dir;    // relative table paths resolve here
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
};

// Parse errors carry line and column; a missing or unknown kind is reported by field.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Hex SHA-256 of the canonical (sorted-key) JSON plus the effective seed.
std::string config_hash(const ExperimentConfig& config);

struct Artifact {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Stage {
  std::string name;
  double wall_seconds = 0.0;
};

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = true;
};

struct RunManifest {
  std::string kind;
  std::string config_hash;
  std::string version;
  std::vector<Artifact> artifacts;
  std::vector<Stage> stages;
  std::vector<Check> checks;

  bool passed() const;
  json to_json() const;
};

// Runs the pipeline for config.kind, writing every artifact into out_dir and
// manifest.json last. Module errors are rethrown with the stage name prefixed.
RunManifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct OracleReport {
  std::string kind;
  std::string oracle;
  std::size_t cases = 0;
  double max_abs = 0.0;
  double max_rel = 0.0;  // |pipeline - oracle| / max(1, |oracle|)
  double tolerance = 0.0;
  bool pass = false;

  json to_json() const;
};

// Brute-force comparison on a small instance; refuses (size-limit) when the
// dense oracle would exceed 4096 x 4096. Writes oracle.json into out_dir.
OracleReport compare_oracle(const ExperimentConfig& config, const std::filesystem::path& out_dir);

inline constexpr std::size_t kOracleDimensionLimit = 4096;

}  // namespace vanhove::harness
