#include <doctest.h>

#include <cmath>
#include <set>

#include "flowgate/bat_selector.hpp"
#include "flowgate/error.hpp"

using namespace flowgate;

namespace {

BitString bits(const char* s) { return BitString::from_string(s); }

// Rewards agreement with a hidden target mask.
FitnessFunction match_target(const BitString& target)
{
    return [target](const FeatureMask& m) {
        return 1.0 - static_cast<double>(distance(m, target)) / static_cast<double>(m.size());
    };
}

BatConfig small_config(std::uint64_t seed)
{
    BatConfig cfg;
    cfg.swarm_size = 12;
    cfg.subgroups = 3;
    cfg.iterations = 15;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_SUITE("bat_selector")
{
    TEST_CASE("inertia weight is linear between its bounds")
    {
        BatConfig cfg;
        CHECK(inertia_weight(0, cfg) == doctest::Approx(0.9));
        CHECK(inertia_weight(100, cfg) == doctest::Approx(0.4));
        CHECK(inertia_weight(50, cfg) == doctest::Approx(0.65));
    }

    TEST_CASE("self-learning factor follows the arccos schedule")
    {
        BatConfig cfg;
        CHECK(self_learning_factor(0, cfg) == doctest::Approx(1.5));
        CHECK(self_learning_factor(100, cfg) == doctest::Approx(0.5));
        CHECK(self_learning_factor(50, cfg) == doctest::Approx(1.0));
        for (int t = 0; t <= 100; ++t) {
            CHECK(self_learning_factor(t, cfg) <= 1.5 + 1e-12);
            CHECK(self_learning_factor(t, cfg) >= 0.5 - 1e-12);
        }
    }

    TEST_CASE("mutation probability grows as a square root")
    {
        BatConfig cfg;
        CHECK(mutation_probability(0, cfg) == 0.0);
        CHECK(mutation_probability(99, cfg) == doctest::Approx(1.0));
        cfg.iterations = 101;
        CHECK(mutation_probability(25, cfg) == doctest::Approx(0.5));
        for (int t = 0; t <= 101; ++t) {
            CHECK(mutation_probability(t, cfg) >= 0.0);
            CHECK(mutation_probability(t, cfg) <= 1.0);
        }
    }

    TEST_CASE("shrinkage factor is linear between its bounds")
    {
        BatConfig cfg;
        CHECK(shrinkage_factor(0, cfg) == doctest::Approx(1.0));
        CHECK(shrinkage_factor(100, cfg) == doctest::Approx(0.2));
        cfg.shrink_max = 1.0;
        cfg.shrink_min = 0.0;
        cfg.iterations = 4;
        CHECK(shrinkage_factor(1, cfg) == doctest::Approx(0.75));
    }

    TEST_CASE("gated term")
    {
        Rng rng(1);
        const auto b = bits("1011");
        CHECK(gated_term(1.0, b, rng) == b);
        CHECK(gated_term(1.5, b, rng) == b);
        CHECK(gated_term(0.0, b, rng).none());
        CHECK(gated_term(-2.0, b, rng).none());

        int passed = 0;
        const int trials = 10000;
        for (int i = 0; i < trials; ++i)
            passed += gated_term(0.5, b, rng).any();
        CHECK(std::abs(passed / double(trials) - 0.5) <= 0.02);
    }

    TEST_CASE("velocity update examples")
    {
        Rng rng(2);
        Bat bat;
        bat.position = bits("1100");
        bat.personal_best = bits("0110");
        bat.velocity = bits("1010");
        bat.frequency = 0.0;

        // every gate closed
        CHECK(update_velocity(bat, bits("0001"), 0.0, 0.0, rng).none());

        // W open, the others closed
        CHECK(update_velocity(bat, bits("0001"), 1.0, 0.0, rng) == bits("1010"));

        // x = anchor = P and W closed: both differences vanish
        Bat fixed = bat;
        fixed.personal_best = fixed.position;
        fixed.frequency = 1.0;
        CHECK(update_velocity(fixed, fixed.position, 0.0, 1.0, rng).none());

        // all gates open: v XOR (x XOR anchor) XOR (x XOR P)
        bat.frequency = 1.0;
        const auto anchor = bits("0001");
        CHECK(update_velocity(bat, anchor, 1.0, 1.0, rng) ==
              (bat.velocity ^ (bat.position ^ anchor) ^ (bat.position ^ bat.personal_best)));
    }

    TEST_CASE("position update and repair")
    {
        Rng rng(3);
        CHECK(update_position(bits("1100"), bits("0000"), rng) == bits("1100"));
        CHECK(update_position(bits("1100"), bits("0110"), rng) == bits("1010"));
        const auto repaired = update_position(bits("1010"), bits("1010"), rng);
        CHECK(repaired.popcount() == 1);
    }

    TEST_CASE("differential mutation")
    {
        Rng rng(4);
        const std::vector<int> same{1, 2, 3};
        const std::vector<int> other{4, 5};

        SUBCASE("closed gates leave the base member")
        {
            const std::vector<FeatureMask> pos{bits("0000"), bits("0101"), bits("0101"), bits("0101"), bits("1111"),
                                               bits("1111")};
            for (int i = 0; i < 20; ++i) {
                const auto v = differential_mutation(0, same, other, pos, 0.0, rng);
                REQUIRE(v);
                CHECK(*v == bits("0101"));
            }
        }

        SUBCASE("OR of equal strings is the string itself")
        {
            // members 1, 2 are 0011 and member 3 is 0000; the other groups are empty strings
            const std::vector<FeatureMask> pos{bits("1111"), bits("0011"), bits("0011"), bits("0000"), bits("0000"),
                                               bits("0000")};
            std::set<std::string> seen;
            for (int i = 0; i < 200; ++i) {
                const auto v = differential_mutation(0, same, other, pos, 1.0, rng);
                REQUIRE(v);
                seen.insert(v->to_string());
            }
            // base 0000 gives 0011; base 0011 gives 0011 XOR 0011 = 0000
            CHECK(seen == std::set<std::string>{"0000", "0011"});
        }

        SUBCASE("all-zero population stays zero")
        {
            const std::vector<FeatureMask> pos(6, bits("0000"));
            for (double f : {0.0, 0.5, 1.0})
                CHECK(differential_mutation(0, same, other, pos, f, rng)->none());
        }

        SUBCASE("too few members is a no-op")
        {
            const std::vector<FeatureMask> pos(6, bits("0101"));
            const std::vector<int> small{1, 2};
            CHECK_FALSE(differential_mutation(0, small, other, pos, 1.0, rng));
            const std::vector<int> lone{4};
            CHECK_FALSE(differential_mutation(0, same, lone, pos, 1.0, rng));
        }
    }

    TEST_CASE("local search")
    {
        Rng rng(5);
        const auto g = bits("10110010");
        CHECK(local_search(g, 0.0, rng) == g);

        // the flip probability saturates at one half
        int flips = 0;
        const int trials = 4000;
        for (int i = 0; i < trials; ++i)
            flips += static_cast<int>(distance(local_search(bits("1111"), 100.0, rng), bits("1111")));
        CHECK(std::abs(flips / (4.0 * trials) - 0.5) <= 0.02);

        for (int i = 0; i < 100; ++i)
            CHECK(local_search(bits("0001"), 100.0, rng).any());

        Rng a(9), b(9);
        CHECK(local_search(g, 1.0, a) == local_search(g, 1.0, b));
    }

    TEST_CASE("acceptance step")
    {
        BatConfig cfg;
        Rng rng(6);
        Bat bat;
        bat.position = bits("1100");
        bat.fitness = 0.5;
        bat.personal_best = bits("1100");
        bat.personal_best_fitness = 0.6;
        bat.loudness = 1.0;
        bat.pulse_rate = 0.1;

        Bat worse = bat;
        CHECK_FALSE(acceptance_step(worse, bits("0011"), 0.4, 3, cfg, rng));
        CHECK(worse.position == bat.position);
        CHECK(worse.loudness == bat.loudness);
        CHECK(worse.pulse_rate == bat.pulse_rate);

        Bat better = bat;
        CHECK(acceptance_step(better, bits("0011"), 0.55, 3, cfg, rng));
        CHECK(better.position == bits("0011"));
        CHECK(better.loudness == doctest::Approx(0.9));
        CHECK(better.pulse_rate == doctest::Approx(0.5 * (1.0 - std::exp(-0.9 * 3))));
        CHECK(better.personal_best_fitness == 0.6); // not improved past the old best
        CHECK(better.personal_best == bits("1100"));

        Bat best = bat;
        CHECK(acceptance_step(best, bits("0011"), 0.9, 3, cfg, rng));
        CHECK(best.personal_best_fitness == 0.9);

        Bat silent = bat;
        silent.loudness = 0.0;
        CHECK_FALSE(acceptance_step(silent, bits("0011"), 0.9, 3, cfg, rng));
    }

    TEST_CASE("constant fitness keeps an initial position")
    {
        std::vector<FeatureMask> initial;
        BatRunOptions opt;
        opt.observer = [&](const SwarmState& s) {
            if (s.iteration == 0)
                for (const auto& b : s.bats)
                    initial.push_back(b.position);
        };
        const auto r = run_bat_search([](const FeatureMask&) { return 0.25; }, 10, small_config(3), opt);
        CHECK(std::find(initial.begin(), initial.end(), r.best) != initial.end());
        REQUIRE(r.trace.size() == 16);
        for (double v : r.trace)
            CHECK(v == 0.25);
    }

    TEST_CASE("swarm invariants hold after every iteration")
    {
        const auto target = bits("1011000110010110");
        BatRunOptions opt;
        int calls = 0;
        opt.observer = [&](const SwarmState& s) {
            ++calls;
            double best_personal = -1.0;
            for (const auto& b : s.bats) {
                CHECK(b.position.size() == 16);
                CHECK(b.velocity.size() == 16);
                CHECK(b.position.any());
                CHECK(b.personal_best_fitness >= b.fitness);
                best_personal = std::max(best_personal, b.personal_best_fitness);
            }
            CHECK(s.global_best_fitness >= best_personal);
            if (s.iteration == 0)
                return; // groups are formed inside the first iteration
            const auto sizes = s.groups.sizes();
            REQUIRE(sizes.size() == 3);
            CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
        };
        const auto r = run_bat_search(match_target(target), 16, small_config(4), opt);
        CHECK(calls == 16);
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            CHECK(r.trace[i] >= r.trace[i - 1]);
        CHECK(r.best_fitness == r.trace.back());
    }

    TEST_CASE("search is deterministic per seed")
    {
        const auto target = bits("1100110011001100");
        const auto a = run_bat_search(match_target(target), 16, small_config(7));
        const auto b = run_bat_search(match_target(target), 16, small_config(7));
        CHECK(a.best == b.best);
        CHECK(a.trace == b.trace);
        CHECK(a.evaluations == b.evaluations);
    }

    TEST_CASE("search finds an easy target")
    {
        const auto target = bits("1010011100");
        auto cfg = small_config(8);
        cfg.swarm_size = 20;
        cfg.iterations = 40;
        const auto r = run_bat_search(match_target(target), 10, cfg);
        CHECK(r.best == target);
    }

    TEST_CASE("baseline switches")
    {
        const auto base = BatConfig::baseline();
        CHECK(base.is_baseline());
        CHECK(base.subgroups == 1);
        CHECK_FALSE(BatConfig{}.is_baseline());
        // the baseline never needs clustering and still runs
        auto cfg = base;
        cfg.swarm_size = 8;
        cfg.iterations = 5;
        const auto r = run_bat_search(match_target(bits("110011")), 6, cfg);
        CHECK(r.trace.size() == 6);
    }

    TEST_CASE("invalid configurations are rejected")
    {
        BatConfig cfg;
        cfg.subgroups = 50;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = BatConfig{};
        cfg.alpha = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = BatConfig{};
        cfg.iterations = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }

    TEST_CASE("fitness failures carry iteration and bat context")
    {
        int calls = 0;
        const FitnessFunction bad = [&](const FeatureMask&) -> double {
            if (++calls > 20)
                throw std::runtime_error("probe exploded");
            return 0.0;
        };
        try {
            run_bat_search(bad, 8, small_config(1));
            FAIL("expected a DataError");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("iteration") != std::string::npos);
            CHECK(msg.find("bat") != std::string::npos);
            CHECK(msg.find("probe exploded") != std::string::npos);
        }
    }
}
