#include <doctest.h>

#include "flowgate/wrapper_fitness.hpp"
#include "support/synthetic.hpp"

using namespace flowgate;

namespace {

// Column 0 separates the classes perfectly; the rest is noise.
EncodedDataset separable(std::uint64_t seed)
{
    Rng rng(seed);
    Eigen::MatrixXd x(100, 6);
    std::vector<FlowClass> y;
    for (Eigen::Index r = 0; r < 100; ++r) {
        const auto c = static_cast<std::size_t>(r % 5);
        x(r, 0) = static_cast<double>(c) * 10.0 + rng.uniform();
        for (Eigen::Index k = 1; k < 6; ++k)
            x(r, k) = testing::normal(rng);
        y.push_back(class_from_code(c));
    }
    return testing::make_dataset(x, y);
}

} // namespace

TEST_SUITE("wrapper_fitness")
{
    TEST_CASE("a separating feature scores one minus the penalty")
    {
        const auto train = separable(1), valid = separable(2);
        auto mask = BitString(6);
        mask.set(0);
        CHECK(wrapper_fitness(mask, train, valid, 0.01, 1) == doctest::Approx(1.0 - 0.01 / 6));
    }

    TEST_CASE("smaller masks win ties")
    {
        const auto train = separable(3), valid = separable(4);
        auto small = BitString(6);
        small.set(0);
        auto large = small;
        large.set(3);
        // both separate perfectly through column 0 at depth 10
        const double a = wrapper_fitness(small, train, valid, 0.05, 1);
        const double b = wrapper_fitness(large, train, valid, 0.05, 1);
        CHECK(a > b);
    }

    TEST_CASE("zero penalty gives the raw probe accuracy")
    {
        testing::BlobSpec spec;
        const auto train = testing::make_blobs(spec, ClassCounts{40, 40, 40, 40, 40}, 1);
        const auto valid = testing::make_blobs(spec, ClassCounts{20, 20, 20, 20, 20}, 2);
        const auto all = BitString::ones(train.cols());
        const double f = wrapper_fitness(all, train, valid, 0.0, 3);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        const double penalized = wrapper_fitness(all, train, valid, 0.1, 3);
        CHECK(penalized == doctest::Approx(f - 0.1));
    }

    TEST_CASE("memoized fitness agrees with the direct call")
    {
        const auto train = separable(5), valid = separable(6);
        const WrapperFitness fit(train, valid, 0.01, 7);
        auto mask = BitString::from_string("010100");
        CHECK(fit(mask) == wrapper_fitness(mask, train, valid, 0.01, 7));
        fit(mask);
        const auto copy = fit;
        copy(mask);
        CHECK(fit.distinct_evaluations() == 1);
        copy(BitString::from_string("100000"));
        CHECK(fit.distinct_evaluations() == 2);
    }
}
