#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowgate/error.hpp"
#include "flowgate/hash.hpp"
#include "flowgate/model_io.hpp"
#include "flowgate/pipeline.hpp"

namespace fs = std::filesystem;
using namespace flowgate;
using nlohmann::json;

namespace {

ClassCounts parse_targets(const std::string& text)
{
    ClassCounts c{};
    std::stringstream ss(text);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
        if (i == kNumClasses)
            throw ConfigError("--targets: expected 5 comma-separated counts");
        try {
            std::size_t used = 0;
            c[i++] = std::stoull(cell, &used);
            if (used != cell.size())
                throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ConfigError("--targets: bad count '" + cell + "'");
        }
    }
    if (i != kNumClasses)
        throw ConfigError("--targets: expected 5 comma-separated counts");
    return c;
}

void require_file(const fs::path& p)
{
    if (!fs::exists(p))
        throw ConfigError("file not found: " + p.string());
}

void write_text(const std::string& text, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << text;
}

std::string stage_hash(const char* stage, const json& cfg, std::uint64_t seed, const std::string& data_hash)
{
    return config_hash(json{{"stage", stage}, {"config", cfg}, {"seed", seed}, {"data", data_hash}});
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"flowgate: flow feature selection and cost-sensitive forest classification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // ingest
    std::vector<std::string> inputs;
    std::string targets, holdout_targets, output, holdout_output;
    std::uint64_t seed = 1;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse KDD CSV, encode and down-sample");
    ingest_cmd->add_option("--input", inputs, "KDD-format CSV file(s)")->required();
    ingest_cmd->add_option("--targets", targets, "Per-class counts n0,n1,n2,n3,n4")->required();
    ingest_cmd->add_option("--seed", seed, "Sampling seed")->required();
    ingest_cmd->add_option("--output", output, "Output dataset file")->required();
    ingest_cmd->add_option("--holdout-targets", holdout_targets, "Counts for a disjoint second split");
    ingest_cmd->add_option("--holdout-output", holdout_output, "Output file for the second split");

    // select-features
    std::string data, config, out;
    auto* select_cmd = app.add_subcommand("select-features", "Search a feature mask with the bat swarm");
    select_cmd->add_option("--data", data, "Ingested training data")->required();
    select_cmd->add_option("--config", config, "Bat configuration (flat JSON)");
    select_cmd->add_option("--seed", seed, "Search seed")->required();
    select_cmd->add_option("--out", out, "Output mask.json")->required();

    // train
    std::string mask_path;
    auto* train_cmd = app.add_subcommand("train", "Train the weighted random forest");
    train_cmd->add_option("--data", data, "Ingested training data")->required();
    train_cmd->add_option("--mask", mask_path, "mask.json from select-features")->required();
    train_cmd->add_option("--config", config, "Forest configuration (flat JSON)");
    train_cmd->add_option("--seed", seed, "Forest seed")->required();
    train_cmd->add_option("--out", out, "Output model.json")->required();

    // classify
    std::string model_path;
    auto* classify_cmd = app.add_subcommand("classify", "Predict classes for a dataset");
    classify_cmd->add_option("--model", model_path, "model.json")->required();
    classify_cmd->add_option("--data", data, "Ingested data")->required();
    classify_cmd->add_option("--out", out, "Output predictions.csv")->required();

    // evaluate
    std::string cost_path;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a model on labelled data");
    evaluate_cmd->add_option("--model", model_path, "model.json")->required();
    evaluate_cmd->add_option("--data", data, "Ingested data")->required();
    evaluate_cmd->add_option("--cost", cost_path, "5x5 cost matrix CSV (default: KDD-99 matrix)");
    evaluate_cmd->add_option("--out", out, "Output report.json")->required();

    // pipeline
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Run all stages from one config file");
    pipeline_cmd->add_option("--config", config, "Pipeline configuration (JSON)")->required();

    // compare
    std::string run_a, run_b, csv_out;
    auto* compare_cmd = app.add_subcommand("compare", "Compare two pipeline runs");
    compare_cmd->add_option("run_a", run_a, "First run directory")->required();
    compare_cmd->add_option("run_b", run_b, "Second run directory")->required();
    compare_cmd->add_option("--csv", csv_out, "Also write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*ingest_cmd) {
            IngestOptions opt;
            for (const auto& i : inputs)
                opt.inputs.emplace_back(i);
            opt.targets = parse_targets(targets);
            opt.seed = seed;
            opt.output = output;
            if (!holdout_targets.empty())
                opt.holdout_targets = parse_targets(holdout_targets);
            if (!holdout_output.empty())
                opt.holdout_output = holdout_output;
            ingest(opt);
        } else if (*select_cmd) {
            require_file(data);
            SelectionConfig cfg;
            if (!config.empty())
                cfg = selection_config_from_json(read_json(config));
            const auto train = load_dataset(data);
            const auto cfg_json = to_json(cfg);
            write_json(select_features(train, cfg, seed, stage_hash("select-features", cfg_json, seed,
                                                                     dataset_hash(train))),
                       out);
        } else if (*train_cmd) {
            require_file(data);
            require_file(mask_path);
            ForestConfig cfg;
            if (!config.empty())
                cfg = forest_config_from_json(read_json(config));
            const auto train = load_dataset(data);
            const auto mask_doc = read_json(mask_path);
            const auto mask = mask_from_json(mask_doc).mask;
            json cfg_json = to_json(cfg);
            cfg_json["mask"] = mask.to_string();
            write_json(train_model(train, mask, cfg, seed, stage_hash("train", cfg_json, seed, dataset_hash(train))),
                       out);
        } else if (*classify_cmd) {
            require_file(model_path);
            require_file(data);
            const auto model = read_json(model_path);
            const auto forest = forest_from_json(model);
            const auto ds = load_dataset(data);
            write_text("# config_hash " + model.value("config_hash", "") + "\n" + predictions_csv(forest, ds), out);
        } else if (*evaluate_cmd) {
            require_file(model_path);
            require_file(data);
            const auto model = read_json(model_path);
            const auto forest = forest_from_json(model);
            const auto ds = load_dataset(data);
            const auto cost = cost_path.empty() ? kdd_cost_matrix() : load_cost_matrix(cost_path);
            write_json(evaluate(forest, ds, cost, model.value("config_hash", "")), out);
        } else if (*pipeline_cmd) {
            require_file(config);
            const fs::path cfg_path(config);
            const auto cfg = pipeline_config_from_json(read_json(cfg_path), cfg_path.parent_path());
            return run_pipeline(cfg);
        } else if (*compare_cmd) {
            const auto cmp = compare_runs(run_a, run_b);
            std::cout << cmp.text;
            if (!csv_out.empty())
                write_text(cmp.csv, csv_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "flowgate: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "flowgate: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
