#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace flowgate {

inline constexpr std::size_t kNumClasses = 5;
inline constexpr std::size_t kNumFeatures = 41;

/// Five-way traffic category. Codes are stable and used as matrix indices.
enum class FlowClass : std::uint8_t { Normal = 0, Probe = 1, DoS = 2, U2R = 3, R2L = 4 };

constexpr std::size_t code(FlowClass c) noexcept { return static_cast<std::size_t>(c); }
FlowClass class_from_code(std::size_t code);
std::string_view class_name(FlowClass c) noexcept;

using ClassCounts = std::array<std::size_t, kNumClasses>;

/// Maps a KDD attack name ("smurf", "normal", optionally with a trailing '.')
/// to its category. Throws DataError for names outside the bundled table.
FlowClass map_attack_to_class(std::string_view label);

/// One raw KDD connection record.
struct FlowRecord {
    std::vector<std::string> features; // 41 values
    std::string label;
};

/// Feature names of the 41-column KDD layout, in column order.
const std::array<std::string_view, kNumFeatures>& kdd_feature_names();

/// Column indices of the symbolic features (protocol_type, service, flag).
inline constexpr std::array<std::size_t, 3> kSymbolicColumns{1, 2, 3};

/// Reads a KDD-format CSV file: 41 features and a label per line, plus an
/// optional trailing difficulty field that is dropped. Blank lines are skipped.
std::vector<FlowRecord> parse_kdd_csv(const std::filesystem::path& path);
std::vector<FlowRecord> parse_kdd_lines(std::string_view text);

/// Sorted distinct values of one symbolic column; the code of a value is its index.
struct SymbolDictionary {
    std::size_t column = 0;
    std::vector<std::string> values;

    double encode(std::string_view value) const;
};

/// Numerically encoded, labelled samples.
struct EncodedDataset {
    Eigen::MatrixXd features; // rows = samples
    std::vector<FlowClass> labels;
    ClassCounts class_counts{};
    std::vector<std::string> feature_names;
    std::vector<SymbolDictionary> dictionaries;

    std::size_t rows() const noexcept { return labels.size(); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(features.cols()); }

    /// Rows `idx` in the given order, sharing names and dictionaries.
    EncodedDataset subset(const std::vector<std::size_t>& idx) const;

    /// Throws DataError if the dataset invariants do not hold.
    void validate() const;
};

ClassCounts count_classes(const std::vector<FlowClass>& labels);

/// Ordinal-encodes symbolic columns from sorted distinct values and parses the
/// rest as reals. Throws DataError naming row and column on bad numbers.
EncodedDataset encode(const std::vector<FlowRecord>& records);

/// Picks exactly targets[j] rows of each class uniformly without replacement.
/// Output rows are grouped by class, each group in ascending source order.
EncodedDataset stratified_downsample(const EncodedDataset& ds, const ClassCounts& targets, std::uint64_t seed);

/// Row indices chosen by stratified_downsample, ascending within each class.
std::vector<std::size_t> stratified_indices(const std::vector<FlowClass>& labels, const ClassCounts& targets,
                                            std::uint64_t seed);

/// Training/test split drawn from one pool without overlap.
struct DatasetSplit {
    EncodedDataset train;
    EncodedDataset test;
};

DatasetSplit stratified_split(const EncodedDataset& ds, const ClassCounts& train_targets,
                              const ClassCounts& test_targets, std::uint64_t seed);

// Exchange file ----------------------------------------------------------

/// Serializes to the textual exchange format. Values are written in shortest
/// round-trip form so reading back reproduces every double exactly.
std::string to_exchange_text(const EncodedDataset& ds);
EncodedDataset from_exchange_text(std::string_view text);

void save_dataset(const EncodedDataset& ds, const std::filesystem::path& path);
EncodedDataset load_dataset(const std::filesystem::path& path);

/// FNV-1a hash of the exchange text, rendered as 16 hex digits.
std::string dataset_hash(const EncodedDataset& ds);

} // namespace flowgate
