#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frechet/evaluate.hpp"
#include "frechet/links.hpp"
#include "frechet/simgen.hpp"

namespace frechet {

inline constexpr int kConfigSchemaVersion = 1;

enum class Command { simulate, fit, predict, bench };
enum class OutputFormat { csv, json };

std::string_view to_string(Command c);
std::string_view to_string(OutputFormat f);

/// A value replaced by a command-line flag.
struct OverrideRecord {
  std::string key;
  nlohmann::json file_value;  // null when the document did not set it
  nlohmann::json flag_value;
};

struct RunConfig {
  Command command = Command::simulate;
  std::uint64_t seed = 1;
  int parallelism = 1;
  std::string output_path;  // empty: stdout
  OutputFormat format = OutputFormat::csv;
  std::vector<Method> methods{Method::lfr, Method::nlfr, Method::snlfr};

  // simulate / bench
  std::optional<SimulationSpec> simulation;
  int replications = 100;
  ExperimentOptions experiment;
  std::vector<ModelId> bench_models;
  std::vector<int> bench_n;
  int bench_p = 2;
  // SPD designs in the sweep; independent_test reproduces the published tables.
  PmPolicy bench_pm_policy = PmPolicy::independent_test;

  // fit
  std::string dataset_path;
  bool standardize = false;
  int grid_size = 20;
  std::vector<LinkComponent> links;
  std::optional<HTransform> h;
  std::optional<Vector> beta_init;
  std::string model_output_path;

  // predict
  std::string model_path;
  std::string covariates_path;

  std::vector<OverrideRecord> overrides;

  /// Normalized document (every field explicit); parse_config of it yields
  /// the same config.
  nlohmann::json to_json() const;
  /// FNV-1a 64 of the normalized document, as 16 hex digits.
  std::string hash() const;
  nlohmann::json provenance() const;
};

/// Parses a JSON config document. `overrides` maps dotted keys
/// ("seed", "simulation.n", "output.path") to values that replace the
/// document's; each replacement is recorded in RunConfig::overrides.
/// Malformed documents and unknown keys throw ConfigError; semantic
/// violations throw ValidationError.
RunConfig parse_config(const std::string& text, const nlohmann::json& overrides = nlohmann::json::object());
RunConfig parse_config_file(const std::string& path, const nlohmann::json& overrides = nlohmann::json::object());

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace frechet
