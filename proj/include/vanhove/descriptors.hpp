#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "vanhove/kernels.hpp"
#include "vanhove/rng.hpp"

namespace vanhove::config {

using json = nlohmann::json;

/// Strict view of one JSON object: every key must be consumed, and any key
/// left over when finish() runs is reported as a config error.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string path);

  const std::string& path() const noexcept { return path_; }
  bool has(const std::string& key) const;
  const json& at(const std::string& key);
  const json* find(const std::string& key);

  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  std::int64_t integer(const std::string& key);
  std::int64_t integer(const std::string& key, std::int64_t fallback);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  bool boolean(const std::string& key, bool fallback);
  std::vector<double> numbers(const std::string& key);
  ObjectReader object(const std::string& key);

  std::string child(const std::string& key) const { return path_ + "/" + key; }
  [[noreturn]] void error(const std::string& key, const std::string& what) const;
  void finish() const;

 private:
  const json* value_;
  std::string path_;
  std::set<std::string> used_;
};

/// Resolves relative table paths and hands out the shared random stream.
struct DescriptorContext {
  std::filesystem::path base_dir;
  std::optional<std::uint64_t> seed;
  std::optional<CounterRng> rng;
  bool used_randomness = false;

  CounterRng& random(const std::string& where);
};

GridPtr parse_grid(ObjectReader reader);

// {type: gaussian|lorentzian|table|uniform|point|zero|identity|hamiltonian|random, ...}
SingularKernel parse_singular(ObjectReader reader, const GridPtr& grid, DescriptorContext& ctx);
// {type: gaussian|lorentzian|table|zero|random, ...}
RegularKernel parse_regular(ObjectReader reader, const GridPtr& grid, DescriptorContext& ctx);

// {singular: ..., regular: ..., normalize: bool}
StateFunctional parse_state(ObjectReader reader, const GridPtr& grid, DescriptorContext& ctx);
// {singular: ..., regular: ...}; always self-adjoint.
Observable parse_observable(ObjectReader reader, const GridPtr& grid, DescriptorContext& ctx);

}  // namespace vanhove::config
