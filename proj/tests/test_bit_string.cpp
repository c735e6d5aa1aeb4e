#include <doctest.h>

#include "flowgate/bit_string.hpp"
#include "flowgate/error.hpp"

using flowgate::BitString;

TEST_SUITE("bit_string")
{
    TEST_CASE("parse and print round trip")
    {
        const auto b = BitString::from_string("10110");
        CHECK(b.size() == 5);
        CHECK(b.test(0));
        CHECK_FALSE(b.test(1));
        CHECK(b.popcount() == 3);
        CHECK(b.to_string() == "10110");
        CHECK(b.indices() == std::vector<int>{0, 2, 3});
        CHECK_THROWS_AS(BitString::from_string("10x"), flowgate::DataError);
    }

    TEST_CASE("bitwise operators")
    {
        const auto a = BitString::from_string("1100");
        const auto b = BitString::from_string("0110");
        CHECK((a ^ b).to_string() == "1010");
        CHECK((a | b).to_string() == "1110");
        CHECK((a & b).to_string() == "0100");
        CHECK(distance(a, b) == 2);
        CHECK(BitString(4).none());
        CHECK(BitString::ones(4).popcount() == 4);
    }

    TEST_CASE("vector view")
    {
        const auto v = BitString::from_string("101").to_vector();
        CHECK(v.size() == 3);
        CHECK(v(0) == 1.0);
        CHECK(v(1) == 0.0);
        // squared euclidean distance on bits equals the Hamming distance
        const auto a = BitString::from_string("110010");
        const auto b = BitString::from_string("011011");
        CHECK((a.to_vector() - b.to_vector()).squaredNorm() == doctest::Approx(double(distance(a, b))));
    }
}
