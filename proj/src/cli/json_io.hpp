#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "medshift/data.hpp"
#include "medshift/inference.hpp"
#include "medshift/likelihood.hpp"
#include "medshift/me_adjust.hpp"
#include "medshift/simulation.hpp"

namespace medshift::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// A fit as written by `fit` and read back by `adjust` / `effect`.
struct FitDocument {
  FitResult fit;
  CommonCauseDist pc;
  double sigma_u = 0.0;
};

Json fit_to_json(const FitResult& fit, const Dataset& d);
FitDocument fit_from_json(const Json& j);

Json adjusted_to_json(const AdjustedParams& a, const StarParams& star, double sigma_u);
Json estimate_to_json(const EffectEstimate& e);

SimScenario scenario_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Lowercase hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);

}  // namespace medshift::cli
