#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frechet/estimators.hpp"
#include "frechet/evaluate.hpp"

namespace frechet {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// The only run-dependent fields of an artifact; each format keeps them on a
/// single line so reruns differ in that line only.
struct RunInfo {
  std::string timestamp;
  double wall_seconds = 0.0;

  static RunInfo now(double wall_seconds);
};

/// provenance: {"config": ..., "config_hash": ..., "seed": ..., "overrides": ...}.
std::string results_csv(const std::vector<ExperimentResult>& results, const nlohmann::json& provenance,
                        const RunInfo& info);
std::string results_json(const std::vector<ExperimentResult>& results, const nlohmann::json& provenance,
                         const RunInfo& info);

/// One row per point: optional id, covariates x1..xp, then the object as
/// q1..qm (wasserstein) or y_i_j entries (SPD).
std::string predictions_csv(const Matrix& X, const std::vector<MetricObject>& predictions, const SpaceSpec& space,
                            const nlohmann::json& provenance, const RunInfo& info,
                            const std::vector<std::string>& ids = {});
std::string predictions_json(const Matrix& X, const std::vector<MetricObject>& predictions, const SpaceSpec& space,
                             const nlohmann::json& provenance, const RunInfo& info,
                             const std::vector<std::string>& ids = {});

/// Model document with provenance and run_info.
std::string model_document(const FittedModel& model, const nlohmann::json& provenance, const RunInfo& info);

/// Pretty JSON with a compact "run_info" member on the second line.
std::string json_with_run_info(nlohmann::json body, const RunInfo& info);

/// Writes text to path, or stdout when path is empty. Throws Error with the
/// system message on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace frechet
