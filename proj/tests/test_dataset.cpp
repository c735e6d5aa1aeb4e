#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "flowgate/dataset.hpp"
#include "flowgate/error.hpp"
#include "support/synthetic.hpp"

using namespace flowgate;

namespace {

std::string record_line(const std::string& protocol, const std::string& label)
{
    std::string s = "0," + protocol + ",http,SF";
    for (std::size_t c = 4; c < kNumFeatures; ++c)
        s += "," + std::to_string(c);
    return s + "," + label;
}

// Column 0 carries a row tag whose residue mod 5 is the class code.
EncodedDataset tagged_pool(const ClassCounts& counts)
{
    std::size_t n = 0;
    for (auto c : counts)
        n += c;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
    std::vector<FlowClass> y;
    Eigen::Index r = 0;
    for (std::size_t j = 0; j < kNumClasses; ++j)
        for (std::size_t k = 0; k < counts[j]; ++k, ++r) {
            x(r, 0) = static_cast<double>(r * 5 + j);
            x(r, 1) = 0.25 * static_cast<double>(r);
            y.push_back(class_from_code(j));
        }
    return testing::make_dataset(x, y);
}

} // namespace

TEST_SUITE("dataset")
{
    TEST_CASE("parse accepts 42 fields and drops a difficulty column")
    {
        const auto recs = parse_kdd_lines(record_line("tcp", "normal.") + "\n");
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].features.size() == kNumFeatures);
        CHECK(recs[0].label == "normal.");

        const auto with_difficulty = parse_kdd_lines(record_line("tcp", "smurf.") + ",18\n");
        REQUIRE(with_difficulty.size() == 1);
        CHECK(with_difficulty[0].label == "smurf.");
    }

    TEST_CASE("parse of empty text yields no records")
    {
        CHECK(parse_kdd_lines("").empty());
        CHECK(parse_kdd_lines("\n\n").empty());
    }

    TEST_CASE("short lines are rejected with the line number")
    {
        std::string line = "0";
        for (int i = 1; i < 40; ++i)
            line += ",1";
        const std::string text = record_line("tcp", "normal.") + "\n" + line + "\n";
        try {
            parse_kdd_lines(text);
            FAIL("expected a DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()) == "line 2: expected 42 fields, got 40");
        }
    }

    TEST_CASE("missing file names the path")
    {
        const std::filesystem::path p = "/nonexistent/kdd.csv";
        try {
            parse_kdd_csv(p);
            FAIL("expected a DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find(p.string()) != std::string::npos);
        }
    }

    TEST_CASE("attack names map to the five categories")
    {
        CHECK(map_attack_to_class("normal") == FlowClass::Normal);
        CHECK(map_attack_to_class("normal.") == FlowClass::Normal);
        CHECK(map_attack_to_class("smurf") == FlowClass::DoS);
        CHECK(map_attack_to_class("neptune.") == FlowClass::DoS);
        CHECK(map_attack_to_class("buffer_overflow") == FlowClass::U2R);
        CHECK(map_attack_to_class("rootkit") == FlowClass::U2R);
        CHECK(map_attack_to_class("portsweep") == FlowClass::Probe);
        CHECK(map_attack_to_class("ipsweep") == FlowClass::Probe);
        CHECK(map_attack_to_class("guess_passwd") == FlowClass::R2L);
        CHECK(map_attack_to_class("warezclient") == FlowClass::R2L);
        CHECK_THROWS_AS(map_attack_to_class("not_an_attack"), DataError);
    }

    TEST_CASE("the 22 training attacks are all known")
    {
        const char* names[] = {"back",      "land",       "neptune",  "pod",          "smurf",    "teardrop",
                               "ipsweep",   "nmap",       "portsweep", "satan",       "buffer_overflow",
                               "loadmodule", "perl",      "rootkit",  "ftp_write",    "guess_passwd",
                               "imap",      "multihop",   "phf",      "spy",          "warezclient",
                               "warezmaster"};
        ClassCounts per_class{};
        for (const char* n : names)
            ++per_class[code(map_attack_to_class(n))];
        CHECK(per_class == ClassCounts{0, 4, 6, 4, 8});
    }

    TEST_CASE("symbolic columns are encoded by sorted order")
    {
        const std::string text = record_line("tcp", "normal.") + "\n" + record_line("udp", "normal.") + "\n" +
                                 record_line("icmp", "smurf.") + "\n";
        const auto ds = encode(parse_kdd_lines(text));
        CHECK(ds.features(0, 1) == 1.0);
        CHECK(ds.features(1, 1) == 2.0);
        CHECK(ds.features(2, 1) == 0.0);
        CHECK(ds.labels[2] == FlowClass::DoS);
        CHECK(ds.class_counts == ClassCounts{2, 0, 1, 0, 0});
        // numeric columns pass through unchanged
        for (std::size_t c = 4; c < kNumFeatures; ++c)
            CHECK(ds.features(0, static_cast<Eigen::Index>(c)) == static_cast<double>(c));
        CHECK(ds.feature_names.size() == kNumFeatures);
        CHECK(ds.feature_names[1] == "protocol_type");
    }

    TEST_CASE("encoding is a pure function of the records")
    {
        const auto text = testing::make_kdd_csv({"normal", "smurf", "ipsweep", "rootkit", "imap", "normal"}, 3);
        const auto a = encode(parse_kdd_lines(text));
        const auto b = encode(parse_kdd_lines(text));
        CHECK(a.features == b.features);
        CHECK(a.labels == b.labels);
        CHECK(to_exchange_text(a) == to_exchange_text(b));
    }

    TEST_CASE("bad numeric values name row and column")
    {
        auto recs = parse_kdd_lines(record_line("tcp", "normal.") + "\n" + record_line("tcp", "normal.") + "\n");
        recs[1].features[5] = "12abc";
        try {
            encode(recs);
            FAIL("expected a DataError");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 1") != std::string::npos);
            CHECK(msg.find("column 5") != std::string::npos);
        }
    }

    TEST_CASE("downsampling to the full counts is a permutation")
    {
        const ClassCounts counts{30, 7, 40, 2, 5};
        const auto pool = tagged_pool(counts);
        const auto out = stratified_downsample(pool, counts, 9);
        std::multiset<double> a, b;
        for (Eigen::Index r = 0; r < pool.features.rows(); ++r)
            a.insert(pool.features(r, 0));
        for (Eigen::Index r = 0; r < out.features.rows(); ++r)
            b.insert(out.features(r, 0));
        CHECK(a == b);
    }

    TEST_CASE("downsampling hits the training targets exactly")
    {
        const ClassCounts pool_counts{19000, 4000, 38000, 60, 1500};
        const ClassCounts targets{17129, 3107, 35700, 52, 1126};
        const auto pool = tagged_pool(pool_counts);
        const auto out = stratified_downsample(pool, targets, 42);
        CHECK(out.class_counts == targets);
        CHECK(count_classes(out.labels) == targets);
        out.validate();

        // rows stay aligned with their labels and values are untouched
        for (Eigen::Index r = 0; r < out.features.rows(); ++r) {
            const double tag = out.features(r, 0);
            const auto row = static_cast<Eigen::Index>(tag) / 5;
            CHECK(static_cast<std::size_t>(static_cast<long>(tag) % 5) == code(out.labels[static_cast<std::size_t>(r)]));
            CHECK(out.features(r, 1) == pool.features(row, 1));
        }
    }

    TEST_CASE("downsampling is deterministic per seed")
    {
        const ClassCounts counts{200, 50, 300, 10, 40};
        const auto pool = tagged_pool(counts);
        const ClassCounts targets{100, 20, 100, 5, 10};
        CHECK(stratified_indices(pool.labels, targets, 5) == stratified_indices(pool.labels, targets, 5));
        CHECK(stratified_indices(pool.labels, targets, 5) != stratified_indices(pool.labels, targets, 6));
        CHECK_THROWS_AS(stratified_downsample(pool, ClassCounts{201, 0, 0, 0, 0}, 1), DataError);
    }

    TEST_CASE("split parts are disjoint and the train part matches downsampling")
    {
        const ClassCounts counts{200, 50, 300, 10, 40};
        const auto pool = tagged_pool(counts);
        const ClassCounts tr{100, 20, 100, 5, 10};
        const ClassCounts te{50, 20, 100, 5, 20};
        const auto split = stratified_split(pool, tr, te, 11);
        CHECK(split.train.class_counts == tr);
        CHECK(split.test.class_counts == te);
        std::set<double> seen;
        for (Eigen::Index r = 0; r < split.train.features.rows(); ++r)
            seen.insert(split.train.features(r, 0));
        for (Eigen::Index r = 0; r < split.test.features.rows(); ++r)
            CHECK(seen.count(split.test.features(r, 0)) == 0);
        CHECK(split.train.features == stratified_downsample(pool, tr, 11).features);
    }

    TEST_CASE("exchange text round-trips every value exactly")
    {
        testing::BlobSpec spec;
        const auto ds = testing::make_blobs(spec, ClassCounts{20, 10, 15, 3, 4}, 17);
        const auto back = from_exchange_text(to_exchange_text(ds));
        CHECK(back.features == ds.features);
        CHECK(back.labels == ds.labels);
        CHECK(back.class_counts == ds.class_counts);
        CHECK(back.feature_names == ds.feature_names);
        CHECK(dataset_hash(back) == dataset_hash(ds));

        const auto kdd = encode(parse_kdd_lines(testing::make_kdd_csv({"normal", "smurf", "satan", "perl", "phf"}, 4)));
        const auto kdd_back = from_exchange_text(to_exchange_text(kdd));
        REQUIRE(kdd_back.dictionaries.size() == kdd.dictionaries.size());
        for (std::size_t i = 0; i < kdd.dictionaries.size(); ++i)
            CHECK(kdd_back.dictionaries[i].values == kdd.dictionaries[i].values);
    }

    TEST_CASE("exchange files round-trip through disk")
    {
        const auto ds = testing::make_imbalanced(ClassCounts{10, 5, 10, 2, 3}, 2);
        const auto path = std::filesystem::temp_directory_path() / "flowgate_ds_roundtrip.ds";
        save_dataset(ds, path);
        const auto back = load_dataset(path);
        CHECK(back.features == ds.features);
        CHECK(back.labels == ds.labels);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(from_exchange_text("garbage\n"), DataError);
    }
}
