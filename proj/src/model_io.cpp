#include "flowgate/model_io.hpp"

#include <fstream>
#include <functional>
#include <set>

#include "flowgate/error.hpp"

namespace flowgate {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* what)
{
    if (!j.is_object())
        throw ConfigError(std::string(what) + ": expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.contains(key))
            throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key)
{
    if (!j.contains(key))
        throw DataError(std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DataError(std::string("key '") + key + "': " + e.what());
    }
}

} // namespace

json to_json(const BatConfig& c)
{
    return json{{"swarm_size", c.swarm_size}, {"subgroups", c.subgroups},   {"iterations", c.iterations},
                {"w_max", c.w_max},           {"w_min", c.w_min},           {"c_max", c.c_max},
                {"c_min", c.c_min},           {"shrink_max", c.shrink_max}, {"shrink_min", c.shrink_min},
                {"freq_min", c.freq_min},     {"freq_max", c.freq_max},     {"alpha", c.alpha},
                {"gamma", c.gamma},           {"lambda", c.lambda},         {"loudness0", c.loudness0},
                {"pulse_rate0", c.pulse_rate0}, {"mutation", c.mutation},   {"self_learning", c.self_learning},
                {"seed", c.seed}};
}

BatConfig bat_config_from_json(const json& j)
{
    BatConfig c;
    std::set<std::string> keys;
    const auto defaults = to_json(c);
    for (const auto& [k, _] : defaults.items())
        keys.insert(k);
    reject_unknown(j, keys, "bat config");
    read(j, "swarm_size", c.swarm_size);
    read(j, "subgroups", c.subgroups);
    read(j, "iterations", c.iterations);
    read(j, "w_max", c.w_max);
    read(j, "w_min", c.w_min);
    read(j, "c_max", c.c_max);
    read(j, "c_min", c.c_min);
    read(j, "shrink_max", c.shrink_max);
    read(j, "shrink_min", c.shrink_min);
    read(j, "freq_min", c.freq_min);
    read(j, "freq_max", c.freq_max);
    read(j, "alpha", c.alpha);
    read(j, "gamma", c.gamma);
    read(j, "lambda", c.lambda);
    read(j, "loudness0", c.loudness0);
    read(j, "pulse_rate0", c.pulse_rate0);
    read(j, "mutation", c.mutation);
    read(j, "self_learning", c.self_learning);
    read(j, "seed", c.seed);
    c.validate();
    return c;
}

json to_json(const ForestConfig& c)
{
    return json{{"trees", c.trees},
                {"max_depth", c.tree.max_depth},
                {"min_samples_leaf", c.tree.min_samples_leaf},
                {"max_features", c.tree.max_features},
                {"class_weights", c.profile.weights},
                {"uniform_profile", c.uniform_profile},
                {"weight_updates", c.weight_updates},
                {"weighted_vote", c.weighted_vote},
                {"invert_majority_beta", c.invert_majority_beta},
                {"holdout_fraction", c.holdout_fraction}};
}

ForestConfig forest_config_from_json(const json& j)
{
    ForestConfig c;
    std::set<std::string> keys;
    const auto defaults = to_json(c);
    for (const auto& [k, _] : defaults.items())
        keys.insert(k);
    reject_unknown(j, keys, "forest config");
    read(j, "trees", c.trees);
    read(j, "max_depth", c.tree.max_depth);
    read(j, "min_samples_leaf", c.tree.min_samples_leaf);
    read(j, "max_features", c.tree.max_features);
    read(j, "class_weights", c.profile.weights);
    read(j, "uniform_profile", c.uniform_profile);
    read(j, "weight_updates", c.weight_updates);
    read(j, "weighted_vote", c.weighted_vote);
    read(j, "invert_majority_beta", c.invert_majority_beta);
    read(j, "holdout_fraction", c.holdout_fraction);
    c.validate();
    return c;
}

json to_json(const DecisionTree& tree)
{
    const auto& nodes = tree.nodes();
    std::function<json(int)> emit = [&](int i) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        json j{{"label", code(n.label)}, {"histogram", n.histogram}};
        if (!n.is_leaf()) {
            j["feature"] = n.feature;
            j["threshold"] = n.threshold;
            j["left"] = emit(n.left);
            j["right"] = emit(n.right);
        }
        return j;
    };
    return nodes.empty() ? json::object() : emit(0);
}

DecisionTree tree_from_json(const json& j)
{
    std::vector<DecisionTree::Node> nodes;
    // Pre-order, matching the order in which trees are grown.
    std::function<int(const json&)> load = [&](const json& n) -> int {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        DecisionTree::Node node;
        node.label = class_from_code(require<std::size_t>(n, "label"));
        node.histogram = require<ClassHistogram>(n, "histogram");
        if (n.contains("feature")) {
            node.feature = require<int>(n, "feature");
            node.threshold = require<double>(n, "threshold");
            if (node.feature < 0)
                throw DataError("negative feature index in tree");
            node.left = load(n.at("left"));
            node.right = load(n.at("right"));
        }
        nodes[static_cast<std::size_t>(id)] = node;
        return id;
    };
    if (!j.is_object() || j.empty())
        throw DataError("empty tree");
    load(j);
    return DecisionTree(std::move(nodes));
}

json to_json(const Forest& f)
{
    json acc = json::array();
    for (Eigen::Index j = 0; j < f.accuracy.rows(); ++j) {
        std::vector<double> row(f.accuracy.row(j).begin(), f.accuracy.row(j).end());
        acc.push_back(row);
    }
    json trees = json::array();
    for (const auto& t : f.trees)
        trees.push_back(to_json(t));
    return json{{"format", "flowgate-model"},
                {"version", kModelFormatVersion},
                {"feature_count", f.feature_count},
                {"mask", f.mask.to_string()},
                {"config", to_json(f.config)},
                {"accuracy_matrix", acc},
                {"trees", trees}};
}

Forest forest_from_json(const json& j)
{
    if (j.value("format", "") != "flowgate-model")
        throw DataError("not a flowgate model document");
    if (j.value("version", 0) != kModelFormatVersion)
        throw DataError("unsupported model version " + std::to_string(j.value("version", 0)));
    Forest f;
    f.feature_count = require<std::size_t>(j, "feature_count");
    f.mask = BitString::from_string(require<std::string>(j, "mask"));
    try {
        f.config = forest_config_from_json(j.at("config"));
    } catch (const ConfigError& e) {
        throw DataError(std::string("model config: ") + e.what());
    }
    for (const auto& t : j.at("trees"))
        f.trees.push_back(tree_from_json(t));
    const auto rows = require<std::vector<std::vector<double>>>(j, "accuracy_matrix");
    if (rows.size() != kNumClasses)
        throw DataError("accuracy matrix must have 5 rows");
    f.accuracy.resize(static_cast<int>(kNumClasses), static_cast<Eigen::Index>(f.trees.size()));
    for (std::size_t r = 0; r < kNumClasses; ++r) {
        if (rows[r].size() != f.trees.size())
            throw DataError("accuracy matrix width does not match tree count");
        for (std::size_t m = 0; m < f.trees.size(); ++m)
            f.accuracy(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m)) = rows[r][m];
    }
    for (const auto& t : f.trees)
        for (const auto& n : t.nodes())
            if (!n.is_leaf() && (static_cast<std::size_t>(n.feature) >= f.feature_count || !f.mask.test(static_cast<std::size_t>(n.feature))))
                throw DataError("tree splits on feature " + std::to_string(n.feature) + " outside the mask");
    return f;
}

json to_json(const MetricsReport& r, const ConfusionMatrix& cm)
{
    json confusion = json::array();
    for (int t = 0; t < kClassesI; ++t) {
        json row = json::array();
        for (int p = 0; p < kClassesI; ++p)
            row.push_back(cm(t, p));
        confusion.push_back(row);
    }
    json per_class = json::object();
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        const auto& c = r.per_class[j];
        per_class[std::string(class_name(class_from_code(j)))] = {
            {"precision", c.precision}, {"recall", c.recall}, {"f_score", c.f_score}, {"support", c.support}};
    }
    return json{{"confusion", confusion}, {"per_class", per_class}, {"precision", r.precision},
                {"recall", r.recall},     {"f_score", r.f_score},   {"accuracy", r.accuracy},
                {"false_alarm", r.false_alarm}, {"cost", r.cost},   {"total", r.total}};
}

json to_json(const MaskDocument& doc)
{
    json names = json::array();
    for (int i : doc.mask.indices())
        names.push_back(static_cast<std::size_t>(i) < doc.feature_names.size()
                            ? doc.feature_names[static_cast<std::size_t>(i)]
                            : "f" + std::to_string(i));
    return json{{"format", "flowgate-mask"},
                {"bits", doc.mask.to_string()},
                {"popcount", doc.mask.popcount()},
                {"selected", names},
                {"fitness", doc.fitness},
                {"trace", doc.trace}};
}

MaskDocument mask_from_json(const json& j)
{
    if (j.value("format", "") != "flowgate-mask")
        throw DataError("not a flowgate mask document");
    MaskDocument doc;
    doc.mask = BitString::from_string(require<std::string>(j, "bits"));
    doc.fitness = require<double>(j, "fitness");
    doc.trace = require<std::vector<double>>(j, "trace");
    doc.feature_names = require<std::vector<std::string>>(j, "selected");
    if (doc.mask.none())
        throw DataError("mask selects no features");
    return doc;
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_json(const json& j, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out)
        throw DataError("write failure on " + path.string());
}

} // namespace flowgate
