#include "flowgate/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "flowgate/error.hpp"
#include "flowgate/rng.hpp"

namespace flowgate {

const std::array<std::string_view, kNumFeatures>& kdd_feature_names()
{
    static const std::array<std::string_view, kNumFeatures> names{
        "duration",
        "protocol_type",
        "service",
        "flag",
        "src_bytes",
        "dst_bytes",
        "land",
        "wrong_fragment",
        "urgent",
        "hot",
        "num_failed_logins",
        "logged_in",
        "num_compromised",
        "root_shell",
        "su_attempted",
        "num_root",
        "num_file_creations",
        "num_shells",
        "num_access_files",
        "num_outbound_cmds",
        "is_host_login",
        "is_guest_login",
        "count",
        "srv_count",
        "serror_rate",
        "srv_serror_rate",
        "rerror_rate",
        "srv_rerror_rate",
        "same_srv_rate",
        "diff_srv_rate",
        "srv_diff_host_rate",
        "dst_host_count",
        "dst_host_srv_count",
        "dst_host_same_srv_rate",
        "dst_host_diff_srv_rate",
        "dst_host_same_src_port_rate",
        "dst_host_srv_diff_host_rate",
        "dst_host_serror_rate",
        "dst_host_srv_serror_rate",
        "dst_host_rerror_rate",
        "dst_host_srv_rerror_rate",
    };
    return names;
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

bool is_symbolic(std::size_t col)
{
    return std::find(kSymbolicColumns.begin(), kSymbolicColumns.end(), col) != kSymbolicColumns.end();
}

} // namespace

std::vector<FlowRecord> parse_kdd_lines(std::string_view text)
{
    std::vector<FlowRecord> records;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty())
            continue;

        auto fields = split_commas(line);
        if (fields.size() != kNumFeatures + 1 && fields.size() != kNumFeatures + 2)
            throw DataError("line " + std::to_string(line_no) + ": expected 42 fields, got " +
                            std::to_string(fields.size()));
        FlowRecord rec;
        rec.features.assign(fields.begin(), fields.begin() + kNumFeatures);
        rec.label = std::string(fields[kNumFeatures]);
        if (rec.label.empty())
            throw DataError("line " + std::to_string(line_no) + ": empty label");
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<FlowRecord> parse_kdd_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw DataError("read failure on " + path.string());
    try {
        return parse_kdd_lines(buf.str());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

double SymbolDictionary::encode(std::string_view value) const
{
    auto it = std::lower_bound(values.begin(), values.end(), value);
    if (it == values.end() || *it != value)
        throw DataError("symbol '" + std::string(value) + "' not in dictionary of column " + std::to_string(column));
    return static_cast<double>(it - values.begin());
}

ClassCounts count_classes(const std::vector<FlowClass>& labels)
{
    ClassCounts c{};
    for (auto l : labels)
        ++c[code(l)];
    return c;
}

EncodedDataset encode(const std::vector<FlowRecord>& records)
{
    if (records.empty())
        throw DataError("cannot encode an empty record list");

    EncodedDataset ds;
    for (auto name : kdd_feature_names())
        ds.feature_names.emplace_back(name);

    for (auto col : kSymbolicColumns) {
        std::set<std::string_view> distinct;
        for (const auto& r : records)
            distinct.insert(r.features.at(col));
        SymbolDictionary dict;
        dict.column = col;
        dict.values.assign(distinct.begin(), distinct.end());
        ds.dictionaries.push_back(std::move(dict));
    }

    const auto n = static_cast<Eigen::Index>(records.size());
    ds.features.resize(n, static_cast<Eigen::Index>(kNumFeatures));
    ds.labels.reserve(records.size());
    for (Eigen::Index row = 0; row < n; ++row) {
        const auto& rec = records[static_cast<std::size_t>(row)];
        if (rec.features.size() != kNumFeatures)
            throw DataError("record " + std::to_string(row) + ": expected 41 features, got " +
                            std::to_string(rec.features.size()));
        std::size_t dict_i = 0;
        for (std::size_t col = 0; col < kNumFeatures; ++col) {
            const auto& field = rec.features[col];
            double value = 0.0;
            if (is_symbolic(col)) {
                value = ds.dictionaries[dict_i++].encode(field);
            } else {
                auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
                if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value))
                    throw DataError("row " + std::to_string(row) + ", column " + std::to_string(col) + " (" +
                                    std::string(kdd_feature_names()[col]) + "): cannot parse '" + field + "'");
            }
            ds.features(row, static_cast<Eigen::Index>(col)) = value;
        }
        ds.labels.push_back(map_attack_to_class(rec.label));
    }
    ds.class_counts = count_classes(ds.labels);
    return ds;
}

EncodedDataset EncodedDataset::subset(const std::vector<std::size_t>& idx) const
{
    EncodedDataset out;
    out.feature_names = feature_names;
    out.dictionaries = dictionaries;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    out.labels.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(idx[r]));
        out.labels.push_back(labels.at(idx[r]));
    }
    out.class_counts = count_classes(out.labels);
    return out;
}

void EncodedDataset::validate() const
{
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw DataError("feature rows (" + std::to_string(features.rows()) + ") != labels (" +
                        std::to_string(labels.size()) + ")");
    if (count_classes(labels) != class_counts)
        throw DataError("class counts do not match labels");
    if (!feature_names.empty() && feature_names.size() != cols())
        throw DataError("feature name count does not match column count");
    if (!features.allFinite())
        throw DataError("non-finite feature value");
}

namespace {

// Per-class shuffled row lists; each class draws from its own stream.
std::array<std::vector<std::size_t>, kNumClasses> shuffled_by_class(const std::vector<FlowClass>& labels,
                                                                    const ClassCounts& needed, std::uint64_t seed)
{
    std::array<std::vector<std::size_t>, kNumClasses> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
        rows[code(labels[i])].push_back(i);
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        auto& r = rows[j];
        if (needed[j] > r.size())
            throw DataError("class " + std::string(class_name(class_from_code(j))) + ": requested " +
                            std::to_string(needed[j]) + " samples, only " + std::to_string(r.size()) +
                            " available");
        Rng rng = Rng::stream(seed, {j});
        // partial Fisher-Yates: the first needed[j] slots are a uniform draw
        for (std::size_t k = 0; k < needed[j]; ++k) {
            auto pick = k + rng.below(r.size() - k);
            std::swap(r[k], r[pick]);
        }
    }
    return rows;
}

} // namespace

std::vector<std::size_t> stratified_indices(const std::vector<FlowClass>& labels, const ClassCounts& targets,
                                            std::uint64_t seed)
{
    auto rows = shuffled_by_class(labels, targets, seed);
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        std::vector<std::size_t> chosen(rows[j].begin(), rows[j].begin() + static_cast<std::ptrdiff_t>(targets[j]));
        std::sort(chosen.begin(), chosen.end());
        out.insert(out.end(), chosen.begin(), chosen.end());
    }
    return out;
}

EncodedDataset stratified_downsample(const EncodedDataset& ds, const ClassCounts& targets, std::uint64_t seed)
{
    return ds.subset(stratified_indices(ds.labels, targets, seed));
}

DatasetSplit stratified_split(const EncodedDataset& ds, const ClassCounts& train_targets,
                              const ClassCounts& test_targets, std::uint64_t seed)
{
    ClassCounts needed{};
    for (std::size_t j = 0; j < kNumClasses; ++j)
        needed[j] = train_targets[j] + test_targets[j];
    auto rows = shuffled_by_class(ds.labels, needed, seed);

    std::vector<std::size_t> train, test;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        auto first = rows[j].begin();
        auto mid = first + static_cast<std::ptrdiff_t>(train_targets[j]);
        auto last = mid + static_cast<std::ptrdiff_t>(test_targets[j]);
        std::vector<std::size_t> a(first, mid), b(mid, last);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        train.insert(train.end(), a.begin(), a.end());
        test.insert(test.end(), b.begin(), b.end());
    }
    return {ds.subset(train), ds.subset(test)};
}

} // namespace flowgate
