#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "flowgate/bat_selector.hpp"
#include "flowgate/metrics.hpp"
#include "flowgate/wrf.hpp"

namespace flowgate {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const BatConfig& cfg);
BatConfig bat_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ForestConfig& cfg);
ForestConfig forest_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MetricsReport& r, const ConfusionMatrix& cm);

/// Mask document written by select-features.
struct MaskDocument {
    FeatureMask mask;
    double fitness = 0.0;
    std::vector<double> trace;
    std::vector<std::string> feature_names;
};

nlohmann::json to_json(const MaskDocument& doc);
MaskDocument mask_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

} // namespace flowgate
