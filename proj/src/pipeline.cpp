#include "flowgate/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "flowgate/error.hpp"
#include "flowgate/hash.hpp"
#include "flowgate/model_io.hpp"
#include "flowgate/wrapper_fitness.hpp"

namespace flowgate {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFitnessSplitStream = 0x66697473ULL;
constexpr std::uint64_t kTestSampleStream = 0x74657374ULL;

ClassCounts counts_from_json(const json& j, const char* key)
{
    ClassCounts c{};
    try {
        const auto v = j.at(key).get<std::vector<std::size_t>>();
        if (v.size() != kNumClasses)
            throw ConfigError(std::string(key) + ": expected 5 counts");
        std::copy(v.begin(), v.end(), c.begin());
    } catch (const json::exception& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
    return c;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void write_text(const std::string& text, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << text;
}

} // namespace

SelectionConfig selection_config_from_json(const json& j)
{
    if (!j.is_object())
        throw ConfigError("selection config: expected a JSON object");
    SelectionConfig cfg;
    json bat = j;
    if (bat.contains("validation_fraction")) {
        cfg.data.validation_fraction = bat.at("validation_fraction").get<double>();
        bat.erase("validation_fraction");
    }
    if (bat.contains("max_fitness_rows")) {
        cfg.data.max_rows = bat.at("max_fitness_rows").get<std::size_t>();
        bat.erase("max_fitness_rows");
    }
    if (!(cfg.data.validation_fraction > 0.0 && cfg.data.validation_fraction < 1.0))
        throw ConfigError("validation_fraction must be in (0, 1)");
    if (cfg.data.max_rows < 2)
        throw ConfigError("max_fitness_rows must be at least 2");
    cfg.bat = bat_config_from_json(bat);
    return cfg;
}

json to_json(const SelectionConfig& cfg)
{
    json j = to_json(cfg.bat);
    j["validation_fraction"] = cfg.data.validation_fraction;
    j["max_fitness_rows"] = cfg.data.max_rows;
    return j;
}

ClassCounts proportional_targets(const ClassCounts& counts, std::size_t total)
{
    const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total >= n)
        return counts;
    ClassCounts out{};
    std::array<double, kNumClasses> remainder{};
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        const double exact = static_cast<double>(counts[j]) * static_cast<double>(total) / static_cast<double>(n);
        out[j] = static_cast<std::size_t>(std::floor(exact));
        remainder[j] = exact - static_cast<double>(out[j]);
        assigned += out[j];
    }
    std::array<std::size_t, kNumClasses> order;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % kNumClasses) {
        const auto j = order[k];
        if (out[j] < counts[j]) {
            ++out[j];
            ++assigned;
        }
    }
    return out;
}

std::pair<EncodedDataset, EncodedDataset> fitness_split(const EncodedDataset& ds, const FitnessDataConfig& cfg,
                                                        std::uint64_t seed)
{
    const auto used = proportional_targets(ds.class_counts, std::min(ds.rows(), cfg.max_rows));
    ClassCounts train{}, valid{};
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        auto v = static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(used[j])));
        if (used[j] >= 2)
            v = std::clamp<std::size_t>(v, 1, used[j] - 1);
        else
            v = 0;
        valid[j] = v;
        train[j] = used[j] - v;
    }
    auto split = stratified_split(ds, train, valid, seed);
    if (split.train.rows() == 0 || split.test.rows() == 0)
        throw DataError("training set too small to build fitness train/validation sets");
    return {std::move(split.train), std::move(split.test)};
}

void PipelineConfig::validate() const
{
    if (!std::filesystem::exists(train_input))
        throw ConfigError("dataset not found: " + train_input.string());
    if (test_input && !std::filesystem::exists(*test_input))
        throw ConfigError("dataset not found: " + test_input->string());
    if (cost_matrix && !std::filesystem::exists(*cost_matrix))
        throw ConfigError("cost matrix not found: " + cost_matrix->string());
    if (output_dir.empty())
        throw ConfigError("output_dir is required");
    if (std::accumulate(train_targets.begin(), train_targets.end(), std::size_t{0}) == 0)
        throw ConfigError("train_targets select no rows");
    if (std::accumulate(test_targets.begin(), test_targets.end(), std::size_t{0}) == 0)
        throw ConfigError("test_targets select no rows");
    selection.bat.validate();
    forest.validate();
}

std::string PipelineConfig::run_label() const
{
    const bool bat_base = selection.bat.is_baseline();
    const bool rf_base = forest.is_baseline();
    if (bat_base && rf_base)
        return "baseline";
    const auto& b = selection.bat;
    const bool bat_full = b.subgroups > 1 && b.mutation && b.self_learning;
    const bool rf_full = !forest.uniform_profile && forest.weight_updates && forest.weighted_vote;
    return bat_full && rf_full ? "improved" : "custom";
}

PipelineConfig pipeline_config_from_json(const json& j, const std::filesystem::path& base_dir)
{
    static const std::set<std::string> keys{"train_input",    "test_input",     "train_targets", "test_targets",
                                            "sample_seed",    "selection_seed", "forest_seed",   "selection",
                                            "forest",         "cost_matrix",    "output_dir"};
    if (!j.is_object())
        throw ConfigError("pipeline config: expected a JSON object");
    for (const auto& [k, _] : j.items())
        if (!keys.contains(k))
            throw ConfigError("pipeline config: unknown key '" + k + "'");
    for (const char* k : {"train_input", "train_targets", "test_targets", "sample_seed", "selection_seed",
                          "forest_seed", "output_dir"})
        if (!j.contains(k))
            throw ConfigError(std::string("pipeline config: missing '") + k + "'");

    PipelineConfig cfg;
    try {
        cfg.train_input = resolve(base_dir, j.at("train_input").get<std::string>());
        if (j.contains("test_input"))
            cfg.test_input = resolve(base_dir, j.at("test_input").get<std::string>());
        cfg.train_targets = counts_from_json(j, "train_targets");
        cfg.test_targets = counts_from_json(j, "test_targets");
        cfg.sample_seed = j.at("sample_seed").get<std::uint64_t>();
        cfg.selection_seed = j.at("selection_seed").get<std::uint64_t>();
        cfg.forest_seed = j.at("forest_seed").get<std::uint64_t>();
        if (j.contains("selection"))
            cfg.selection = selection_config_from_json(j.at("selection"));
        if (j.contains("forest"))
            cfg.forest = forest_config_from_json(j.at("forest"));
        if (j.contains("cost_matrix"))
            cfg.cost_matrix = resolve(base_dir, j.at("cost_matrix").get<std::string>());
        cfg.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("pipeline config: ") + e.what());
    }
    cfg.selection.bat.seed = cfg.selection_seed;
    return cfg;
}

json to_json(const PipelineConfig& cfg)
{
    json j{{"train_input", cfg.train_input.string()},
           {"train_targets", cfg.train_targets},
           {"test_targets", cfg.test_targets},
           {"sample_seed", cfg.sample_seed},
           {"selection_seed", cfg.selection_seed},
           {"forest_seed", cfg.forest_seed},
           {"selection", to_json(cfg.selection)},
           {"forest", to_json(cfg.forest)},
           {"output_dir", cfg.output_dir.string()}};
    if (cfg.test_input)
        j["test_input"] = cfg.test_input->string();
    if (cfg.cost_matrix)
        j["cost_matrix"] = cfg.cost_matrix->string();
    return j;
}

std::string config_hash(const json& canonical)
{
    return hex64(fnv1a64(canonical.dump()));
}

void ingest(const IngestOptions& opt)
{
    if (opt.inputs.empty())
        throw ConfigError("ingest: no input files");
    for (const auto& p : opt.inputs)
        if (!std::filesystem::exists(p))
            throw ConfigError("input not found: " + p.string());
    if (opt.holdout_targets.has_value() != opt.holdout_output.has_value())
        throw ConfigError("ingest: holdout targets and holdout output go together");

    std::vector<FlowRecord> records;
    for (const auto& p : opt.inputs) {
        auto part = parse_kdd_csv(p);
        records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    const auto ds = encode(records);
    if (opt.holdout_targets) {
        auto split = stratified_split(ds, opt.targets, *opt.holdout_targets, opt.seed);
        save_dataset(split.train, opt.output);
        save_dataset(split.test, *opt.holdout_output);
    } else {
        save_dataset(stratified_downsample(ds, opt.targets, opt.seed), opt.output);
    }
}

json select_features(const EncodedDataset& train, const SelectionConfig& cfg, std::uint64_t seed,
                     const std::string& cfg_hash)
{
    BatConfig bat = cfg.bat;
    bat.seed = seed;
    auto [fit_train, fit_valid] = fitness_split(train, cfg.data, stream_seed(seed, {kFitnessSplitStream}));
    WrapperFitness fitness(std::move(fit_train), std::move(fit_valid), bat.lambda, seed);
    const auto result = run_bat_search(fitness, train.cols(), bat);

    MaskDocument doc{result.best, result.best_fitness, result.trace, train.feature_names};
    json j = to_json(doc);
    j["distinct_evaluations"] = fitness.distinct_evaluations();
    j["config_hash"] = cfg_hash;
    return j;
}

json train_model(const EncodedDataset& train, const FeatureMask& mask, const ForestConfig& cfg, std::uint64_t seed,
                 const std::string& cfg_hash)
{
    json j = to_json(fit_forest(train, mask, cfg, seed));
    j["seed"] = seed;
    j["config_hash"] = cfg_hash;
    return j;
}

std::string predictions_csv(const Forest& forest, const EncodedDataset& ds)
{
    const auto pred = predict_batch(forest, ds);
    std::string out = "row,predicted,truth\n";
    for (std::size_t i = 0; i < pred.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += class_name(pred[i]);
        out += ',';
        out += class_name(ds.labels[i]);
        out += '\n';
    }
    return out;
}

json evaluate(const Forest& forest, const EncodedDataset& ds, const CostMatrix& cost, const std::string& cfg_hash)
{
    const auto pred = predict_batch(forest, ds);
    const auto cm = confusion(ds.labels, pred);
    json j = to_json(report(cm, cost), cm);
    j["dataset_hash"] = dataset_hash(ds);
    j["config_hash"] = cfg_hash;
    return j;
}

int run_pipeline(const PipelineConfig& cfg)
{
    const auto canonical = to_json(cfg);
    // where the artifacts go does not change them
    auto hashed = canonical;
    hashed.erase("output_dir");
    const auto hash = config_hash(hashed);
    json manifest{{"version", kVersion},
                  {"config_hash", hash},
                  {"label", cfg.run_label()},
                  {"seeds",
                   {{"sample", cfg.sample_seed}, {"selection", cfg.selection_seed}, {"forest", cfg.forest_seed}}},
                  {"config", canonical},
                  {"stages", json::array()},
                  {"status", "running"}};
    const auto& dir = cfg.output_dir;
    auto write_manifest = [&] {
        if (std::filesystem::exists(dir))
            write_json(manifest, dir / "manifest.json");
    };

    std::string stage = "validate";
    auto timed = [&](const std::string& name, auto&& body) {
        stage = name;
        const auto start = std::chrono::steady_clock::now();
        body();
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        manifest["stages"].push_back({{"name", name}, {"seconds", took.count()}});
    };

    int code = 0;
    try {
        cfg.validate();
        std::filesystem::create_directories(dir);

        EncodedDataset train, test;
        timed("ingest", [&] {
            auto records = parse_kdd_csv(cfg.train_input);
            const auto train_rows = records.size();
            if (cfg.test_input) {
                auto more = parse_kdd_csv(*cfg.test_input);
                records.insert(records.end(), std::make_move_iterator(more.begin()),
                               std::make_move_iterator(more.end()));
            }
            const auto all = encode(records);
            if (cfg.test_input) {
                std::vector<std::size_t> a(train_rows), b(records.size() - train_rows);
                std::iota(a.begin(), a.end(), std::size_t{0});
                std::iota(b.begin(), b.end(), train_rows);
                train = stratified_downsample(all.subset(a), cfg.train_targets, cfg.sample_seed);
                test = stratified_downsample(all.subset(b), cfg.test_targets,
                                             stream_seed(cfg.sample_seed, {kTestSampleStream}));
            } else {
                auto split = stratified_split(all, cfg.train_targets, cfg.test_targets, cfg.sample_seed);
                train = std::move(split.train);
                test = std::move(split.test);
            }
            save_dataset(train, dir / "train.ds");
            save_dataset(test, dir / "test.ds");
            manifest["train_dataset_hash"] = dataset_hash(train);
            manifest["test_dataset_hash"] = dataset_hash(test);
        });

        FeatureMask mask;
        timed("select-features", [&] {
            auto j = select_features(train, cfg.selection, cfg.selection_seed, hash);
            mask = mask_from_json(j).mask;
            write_json(j, dir / "mask.json");
        });

        Forest forest;
        timed("train", [&] {
            auto j = train_model(train, mask, cfg.forest, cfg.forest_seed, hash);
            write_json(j, dir / "model.json");
            forest = forest_from_json(j);
        });

        timed("evaluate", [&] {
            const auto cost = cfg.cost_matrix ? load_cost_matrix(*cfg.cost_matrix) : kdd_cost_matrix();
            write_text("# config_hash " + hash + "\n" + predictions_csv(forest, test), dir / "predictions.csv");
            write_json(evaluate(forest, test, cost, hash), dir / "report.json");
        });
        manifest["status"] = "ok";
    } catch (const ConfigError& e) {
        std::cerr << "flowgate pipeline: " << e.what() << '\n';
        manifest["status"] = "failed";
        manifest["failed_stage"] = stage;
        manifest["error"] = e.what();
        code = 2;
    } catch (const std::exception& e) {
        std::cerr << "flowgate pipeline: stage " << stage << ": " << e.what() << '\n';
        manifest["status"] = "failed";
        manifest["failed_stage"] = stage;
        manifest["error"] = e.what();
        code = 3;
    }
    write_manifest();
    return code;
}

namespace {

struct RunData {
    json manifest;
    json report;
};

RunData load_run(const std::filesystem::path& dir)
{
    RunData r;
    for (const char* name : {"manifest.json", "report.json"}) {
        const auto p = dir / name;
        if (!std::filesystem::exists(p))
            throw DataError("run " + dir.string() + ": missing " + name);
    }
    r.manifest = read_json(dir / "manifest.json");
    r.report = read_json(dir / "report.json");
    return r;
}

std::string fixed(double v)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << v;
    return s.str();
}

} // namespace

Comparison compare_runs(const std::filesystem::path& run_a, const std::filesystem::path& run_b)
{
    const auto a = load_run(run_a);
    const auto b = load_run(run_b);
    const auto ha = a.report.value("dataset_hash", "");
    const auto hb = b.report.value("dataset_hash", "");
    if (ha.empty() || ha != hb)
        throw DataError("runs were evaluated on different test sets (" + ha + " vs " + hb + ")");

    std::vector<std::pair<std::string, std::pair<double, double>>> rows;
    auto add = [&](const std::string& name, const json& ja, const json& jb) {
        rows.push_back({name, {ja.get<double>(), jb.get<double>()}});
    };
    for (const char* k : {"accuracy", "false_alarm", "precision", "recall", "f_score", "cost"})
        add(k, a.report.at(k), b.report.at(k));
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        const std::string cls(class_name(class_from_code(j)));
        add("recall_" + cls, a.report.at("per_class").at(cls).at("recall"),
            b.report.at("per_class").at(cls).at("recall"));
    }

    const auto label_a = a.manifest.value("label", "a");
    const auto label_b = b.manifest.value("label", "b");
    Comparison out;
    out.csv = "metric,a,b,delta\n";
    std::ostringstream text;
    text << std::left << std::setw(16) << "metric" << std::right << std::setw(14) << ("a:" + label_a)
         << std::setw(14) << ("b:" + label_b) << std::setw(14) << "b-a" << '\n';
    for (const auto& [name, v] : rows) {
        const double delta = v.second - v.first;
        out.csv += name + ',' + fixed(v.first) + ',' + fixed(v.second) + ',' + fixed(delta) + '\n';
        text << std::left << std::setw(16) << name << std::right << std::setw(14) << fixed(v.first)
             << std::setw(14) << fixed(v.second) << std::setw(14) << fixed(delta) << '\n';
    }
    out.text = text.str();
    return out;
}

} // namespace flowgate
