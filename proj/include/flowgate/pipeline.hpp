#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowgate/bat_selector.hpp"
#include "flowgate/dataset.hpp"
#include "flowgate/metrics.hpp"
#include "flowgate/wrf.hpp"

namespace flowgate {

inline constexpr const char* kVersion = "1.0.0";

/// How select-features builds its fitness data from the ingested training set.
struct FitnessDataConfig {
    double validation_fraction = 1.0 / 3.0;
    std::size_t max_rows = 6000; // cap on train + validation rows used by the probe
};

/// Bat configuration file: a flat JSON object of BatConfig fields plus the
/// FitnessDataConfig fields. Unknown keys are rejected.
struct SelectionConfig {
    BatConfig bat;
    FitnessDataConfig data;
};

SelectionConfig selection_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SelectionConfig& cfg);

/// Splits the ingested training set into probe train/validation sets,
/// stratified and deterministic under `seed`.
std::pair<EncodedDataset, EncodedDataset> fitness_split(const EncodedDataset& ds, const FitnessDataConfig& cfg,
                                                        std::uint64_t seed);

/// Class targets proportional to `counts` scaled to `total` rows (largest remainder).
ClassCounts proportional_targets(const ClassCounts& counts, std::size_t total);

struct PipelineConfig {
    std::filesystem::path train_input;
    std::optional<std::filesystem::path> test_input; // absent: test rows come from the same pool
    ClassCounts train_targets{};
    ClassCounts test_targets{};
    std::uint64_t sample_seed = 1;
    std::uint64_t selection_seed = 1;
    std::uint64_t forest_seed = 1;
    SelectionConfig selection;
    ForestConfig forest;
    std::optional<std::filesystem::path> cost_matrix;
    std::filesystem::path output_dir;

    /// Throws ConfigError naming the first missing path or bad value.
    void validate() const;
    /// "baseline" when every improvement is switched off, "improved" when all are on, else "custom".
    std::string run_label() const;
};

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const PipelineConfig& cfg);

/// FNV-1a of the canonical JSON dump.
std::string config_hash(const nlohmann::json& canonical);

// Stage commands. Each writes its output file and returns it as JSON.

struct IngestOptions {
    std::vector<std::filesystem::path> inputs;
    ClassCounts targets{};
    std::uint64_t seed = 1;
    std::filesystem::path output;
    std::optional<ClassCounts> holdout_targets; // disjoint second split
    std::optional<std::filesystem::path> holdout_output;
};

void ingest(const IngestOptions& opt);

nlohmann::json select_features(const EncodedDataset& train, const SelectionConfig& cfg, std::uint64_t seed,
                               const std::string& cfg_hash);
nlohmann::json train_model(const EncodedDataset& train, const FeatureMask& mask, const ForestConfig& cfg,
                           std::uint64_t seed, const std::string& cfg_hash);
/// CSV with columns row,predicted,truth.
std::string predictions_csv(const Forest& forest, const EncodedDataset& ds);
nlohmann::json evaluate(const Forest& forest, const EncodedDataset& ds, const CostMatrix& cost,
                        const std::string& cfg_hash);

/// Runs ingest, select-features, train and evaluate into cfg.output_dir and
/// writes manifest.json. Returns the CLI exit code; the manifest records the
/// failing stage on error.
int run_pipeline(const PipelineConfig& cfg);

struct Comparison {
    std::string csv;
    std::string text;
};

/// Side-by-side metrics of two pipeline output directories.
Comparison compare_runs(const std::filesystem::path& run_a, const std::filesystem::path& run_b);

} // namespace flowgate
