#pragma once

#include <string>

#include <json.hpp>

#include "frechet/estimators.hpp"

namespace frechet {

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON document of a fitted model. Links must be serializable.
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& doc);

/// Rebuilds links from any descriptor kind the library writes.
LinkSpec link_from_descriptor(const nlohmann::json& descriptor);

}  // namespace frechet
