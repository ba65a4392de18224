#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mfga::cli {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v{"simulate-nplayer", "solve-mfg",      "nash-gap",
                                          "chaos-study",      "counterexample", "solve-pde",
                                          "validate-model"};
  return v;
}

/// Everything a run needs. Loaded from JSON; command-line flags override.
struct RunConfig {
  std::string model;
  std::string output_dir = "out";
  std::uint64_t master_seed = 20240601;
  std::size_t n_steps = 200;
  std::size_t nodes = 101;
  double damping = 0.5;
  double tol = 1e-4;
  std::size_t max_iter = 200;
  /// pde | monte_carlo | enumeration
  std::string mode = "pde";
  std::size_t n_particles = 100000;
  std::size_t histogram_bins = 1000;
  std::vector<std::size_t> ladder;
  std::size_t replications = 200;
  bool bridge_correction = false;
  /// Constant mean of the initial flow (defaults to w(0)).
  std::vector<double> init_mean;
  std::size_t n_ridge = 20;
  std::size_t reference_particles = 1000000;
  std::size_t probes = 10000;

  static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
  nlohmann::json to_json() const;
  /// Throws a configuration error when a field is out of range or a file is missing.
  void validate(const std::string& verb) const;
  /// SHA-256 of the canonical JSON form (output_dir excluded).
  std::string hash() const;
};

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  nlohmann::json summary;
};

/// Runs one verb and writes its artifacts plus manifest.json into
/// config.output_dir. Errors are reported on `err` as one JSON object.
RunResult run(const std::string& verb, const RunConfig& config, std::ostream& err);

std::string sha256_hex(std::string_view data);

/// Writes via a temporary file and rename.
void write_atomic(const std::string& path, std::string_view content);

/// "3,5,7" -> {3,5,7}.
std::vector<std::size_t> parse_ladder(const std::string& text);

}  // namespace mfga::cli
