#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gltunnel/assembly.hpp"

namespace gltunnel::cli {

/// Invalid configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  AmbientModel model;
  NeckOptions neck;
  std::optional<double> L;
  double cylinder_length = 0.0;
  std::vector<double> delta0_grid;
  double sweep_tolerance_length = 0.02;
  double sweep_tolerance_volume = 0.05;
  std::string output_dir = "out";
};

/// Flat JSON object; absent keys keep their defaults, unknown keys are errors.
/// Validates every precondition that can be checked before building.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, in a fixed order.
nlohmann::ordered_json config_to_json(const RunConfig& config);

enum ExitCode : int { kCertified = 0, kFailed = 1, kConfigError = 2 };

int cmd_build(const RunConfig& config, bool quiet);
int cmd_measure(const RunConfig& config, bool quiet);
int cmd_sweep(const RunConfig& config, bool quiet);
int cmd_telescope(const RunConfig& config, bool quiet);

/// Entry point of the `gltunnel` executable.
int run(int argc, char** argv);

}  // namespace gltunnel::cli
