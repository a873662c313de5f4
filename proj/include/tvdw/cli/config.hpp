#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvdw/weights.hpp"

namespace tvdw {

/// Raised for unknown keys, malformed values and out-of-range parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { eval, simulate, blocks, clt, lil, chung, modulus, fclt, validate_weights };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Every experiment parameter with its default. Text form is one `key = value`
/// per line, `#` starts a comment; lists are comma separated and `weights`
/// takes a generator name or its JSON object.
struct RunConfig {
  ExperimentKind kind = ExperimentKind::eval;
  unsigned r = 2;
  WeightSpec weights = WeightSpec::constant_weights();
  double p = 0.75;
  std::optional<double> delta;
  std::size_t n = 5000;
  std::size_t replicas = 10000;
  std::uint64_t seed = 1;
  double x = 0.5;
  double eps = 1e-12;
  std::vector<std::size_t> levels{20};  // modulus: h = r^{-level}
  std::vector<double> t_grid{0.25, 0.5, 1.0};
  double beta = 1.0;
  std::size_t x_samples = 100000;
  std::string normalization = "exact_s";
  std::size_t count = 50;
  double tol = 1e-12;
  std::string anchor = "preceding_block_end";
  int exponent_offset = 1;
  double q = 2.0;
  double ks_tolerance = 0.02;
  // Output controls; excluded from the manifest hash.
  std::string out;
  int threads = 0;
  bool svg = false;

  /// Applies one `key = value` assignment.
  void set(const std::string& key, const std::string& value);

  /// All keys as sorted `key=value` lines; parsing it back reproduces it byte for byte.
  std::string canonical_text() const;
  /// Canonical text of the fields that determine the results.
  std::string manifest_text() const;
  /// FNV-1a 64 of manifest_text(), as 16 hex digits.
  std::string config_hash() const;
};

/// Keys accepted by RunConfig::set, sorted.
const std::vector<std::string>& config_keys();

RunConfig parse_config_text(const std::string& text, std::optional<ExperimentKind> kind = std::nullopt);
RunConfig load_config_file(const std::string& path, std::optional<ExperimentKind> kind = std::nullopt);

/// Seed, stream assignment, replica count, version and config hash.
nlohmann::json manifest(const RunConfig& config);

/// Default output root: $TVDW_OUTPUT_DIR, else "tvdw-out".
std::string default_output_root();

}  // namespace tvdw
