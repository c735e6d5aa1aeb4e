#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "flowgate/error.hpp"
#include "flowgate/metrics.hpp"

using namespace flowgate;

namespace {

std::vector<FlowClass> table_iii_test_labels()
{
    const ClassCounts counts{12183, 1880, 21705, 228, 1468};
    std::vector<FlowClass> y;
    for (std::size_t j = 0; j < kNumClasses; ++j)
        y.insert(y.end(), counts[j], class_from_code(j));
    return y;
}

} // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("confusion counts")
    {
        const std::vector<FlowClass> y{FlowClass::Normal, FlowClass::Probe, FlowClass::DoS, FlowClass::U2R,
                                       FlowClass::R2L};
        const auto cm = confusion(y, y);
        CHECK(cm.sum() == 5);
        CHECK(cm == ConfusionMatrix::Identity());

        const std::vector<FlowClass> truth{FlowClass::DoS};
        const std::vector<FlowClass> pred{FlowClass::Normal};
        const auto one = confusion(truth, pred);
        CHECK(one(2, 0) == 1);
        CHECK(one.sum() == 1);

        CHECK_THROWS_AS(confusion(y, pred), DataError);
    }

    TEST_CASE("perfect classifier")
    {
        const auto y = table_iii_test_labels();
        const auto r = report(confusion(y, y), kdd_cost_matrix());
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 1.0);
        CHECK(r.f_score == 1.0);
        CHECK(r.accuracy == 1.0);
        CHECK(r.false_alarm == 0.0);
        CHECK(r.cost == 0.0);
        CHECK(r.total == static_cast<std::int64_t>(y.size()));
    }

    TEST_CASE("all-normal predictor on the test distribution")
    {
        const auto y = table_iii_test_labels();
        REQUIRE(y.size() == 37464);
        const std::vector<FlowClass> pred(y.size(), FlowClass::Normal);
        const auto r = report(confusion(y, pred), kdd_cost_matrix());
        CHECK(r.accuracy == doctest::Approx(12183.0 / 37464.0));
        CHECK(r.accuracy == doctest::Approx(0.3252).epsilon(1e-3));
        CHECK(r.false_alarm == 0.0);
        CHECK(r.per_class[0].recall == 1.0);
        CHECK(r.per_class[2].recall == 0.0);
        // cost oracle: every attack row's column-0 entry times its support
        const double cost = (1880 * 1.0 + 21705 * 2.0 + 228 * 3.0 + 1468 * 4.0) / 37464.0;
        CHECK(r.cost == doctest::Approx(cost));
    }

    TEST_CASE("uniform off-diagonal cost is the error rate")
    {
        CostMatrix unit = CostMatrix::Ones() - CostMatrix::Identity();
        std::vector<FlowClass> y(100, FlowClass::DoS), pred(100, FlowClass::DoS);
        for (int i = 0; i < 10; ++i)
            pred[i] = FlowClass::Probe;
        const auto r = report(confusion(y, pred), unit);
        CHECK(r.accuracy == doctest::Approx(0.9));
        CHECK(r.cost == doctest::Approx(0.1));
    }

    TEST_CASE("weighted recall equals accuracy")
    {
        std::vector<FlowClass> y, pred;
        for (int i = 0; i < 300; ++i) {
            y.push_back(class_from_code(static_cast<std::size_t>(i % 5 == 0 ? i % 3 : i % 5)));
            pred.push_back(class_from_code(static_cast<std::size_t>((i * 7) % 11 % 5)));
        }
        const auto r = report(confusion(y, pred), kdd_cost_matrix());
        CHECK(r.recall == doctest::Approx(r.accuracy));
    }

    TEST_CASE("false alarm counts only true normal traffic")
    {
        const std::vector<FlowClass> y{FlowClass::Normal, FlowClass::Normal, FlowClass::Normal, FlowClass::Normal,
                                       FlowClass::DoS};
        const std::vector<FlowClass> pred{FlowClass::Normal, FlowClass::Probe, FlowClass::Normal, FlowClass::Normal,
                                          FlowClass::Normal};
        const auto r = report(confusion(y, pred), kdd_cost_matrix());
        CHECK(r.false_alarm == doctest::Approx(0.25));
    }

    TEST_CASE("bundled cost matrix")
    {
        const auto c = kdd_cost_matrix();
        CHECK(c.diagonal().isZero());
        CHECK(c(4, 0) == 4.0);
        CHECK(c(3, 0) == 3.0);
        CHECK(c(0, 1) == 1.0);
        CHECK(c(2, 1) == 1.0);
    }

    TEST_CASE("cost matrix files")
    {
        const auto dir = std::filesystem::temp_directory_path();
        const auto good = dir / "flowgate_cost_ok.csv";
        std::ofstream(good) << "# unit costs\n0,1,1,1,1\n1,0,1,1,1\n1,1,0,1,1\n1,1,1,0,1\n1,1,1,1,0\n";
        CHECK(load_cost_matrix(good) == CostMatrix::Ones() - CostMatrix::Identity());

        const auto bad = dir / "flowgate_cost_bad.csv";
        std::ofstream(bad) << "0,1,1\n";
        CHECK_THROWS_AS(load_cost_matrix(bad), ConfigError);
        CHECK_THROWS_AS(load_cost_matrix(dir / "flowgate_no_such_cost.csv"), ConfigError);
        std::filesystem::remove(good);
        std::filesystem::remove(bad);
    }
}
