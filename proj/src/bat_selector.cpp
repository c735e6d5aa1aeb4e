#include "flowgate/bat_selector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flowgate/error.hpp"

namespace flowgate {

void BatConfig::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok)
            throw ConfigError(std::string("bat config: ") + what);
    };
    require(swarm_size >= 1, "swarm_size must be >= 1");
    require(subgroups >= 1, "subgroups must be >= 1");
    require(swarm_size >= subgroups, "swarm_size must be >= subgroups");
    require(iterations >= 2, "iterations must be >= 2");
    require(w_max >= w_min && w_min > 0, "need w_max >= w_min > 0");
    require(c_max >= c_min && c_min >= 0, "need c_max >= c_min >= 0");
    require(shrink_max <= 1 && shrink_max >= shrink_min && shrink_min >= 0, "need 1 >= shrink_max >= shrink_min >= 0");
    require(freq_max >= freq_min, "need freq_max >= freq_min");
    require(alpha > 0 && alpha < 1, "alpha must be in (0, 1)");
    require(gamma > 0, "gamma must be positive");
    require(lambda >= 0, "lambda must be non-negative");
    require(loudness0 > 0, "loudness0 must be positive");
    require(pulse_rate0 >= 0 && pulse_rate0 <= 1, "pulse_rate0 must be in [0, 1]");
}

BatConfig BatConfig::baseline()
{
    BatConfig cfg;
    cfg.subgroups = 1;
    cfg.mutation = false;
    cfg.self_learning = false;
    return cfg;
}

double inertia_weight(int t, const BatConfig& cfg)
{
    return cfg.w_max - (cfg.w_max - cfg.w_min) * t / cfg.iterations;
}

double self_learning_factor(int t, const BatConfig& cfg)
{
    const double arg = std::clamp(-2.0 * t / cfg.iterations + 1.0, -1.0, 1.0);
    return cfg.c_min + (cfg.c_max - cfg.c_min) * (1.0 - std::acos(arg) / std::numbers::pi);
}

double mutation_probability(int t, const BatConfig& cfg)
{
    return std::clamp(std::sqrt(static_cast<double>(t) / (cfg.iterations - 1)), 0.0, 1.0);
}

double shrinkage_factor(int t, const BatConfig& cfg)
{
    return cfg.shrink_min + (cfg.shrink_max - cfg.shrink_min) * (cfg.iterations - t) / cfg.iterations;
}

BitString gated_term(double coeff, const BitString& bits, Rng& rng)
{
    const double p = std::clamp(coeff, 0.0, 1.0);
    if (rng.uniform() < p)
        return bits;
    return BitString(bits.size());
}

BitString update_velocity(const Bat& bat, const FeatureMask& anchor, double inertia, double self_learning, Rng& rng)
{
    auto v = gated_term(inertia, bat.velocity, rng);
    v ^= gated_term(bat.frequency, bat.position ^ anchor, rng);
    v ^= gated_term(self_learning, bat.position ^ bat.personal_best, rng);
    return v;
}

void repair_mask(FeatureMask& mask, Rng& rng)
{
    if (mask.none() && mask.size() > 0)
        mask.set(rng.below(mask.size()));
}

FeatureMask update_position(const FeatureMask& position, const BitString& velocity, Rng& rng)
{
    auto x = position ^ velocity;
    repair_mask(x, rng);
    return x;
}

std::optional<BitString> differential_mutation(int target, std::span<const int> same_group,
                                               std::span<const int> other_groups,
                                               std::span<const FeatureMask> positions, double shrink, Rng& rng)
{
    std::vector<int> same;
    for (int i : same_group)
        if (i != target)
            same.push_back(i);
    std::vector<int> other;
    for (int i : other_groups)
        if (i != target)
            other.push_back(i);
    if (same.size() < 3 || other.size() < 2)
        return std::nullopt;

    // Draw without replacement: partial shuffle of each pool.
    auto draw = [&rng](std::vector<int>& pool, std::size_t k) {
        for (std::size_t j = 0; j < k; ++j)
            std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
    };
    draw(same, 3);
    draw(other, 2);
    const auto& x1 = positions[static_cast<std::size_t>(same[0])];
    const auto& x2 = positions[static_cast<std::size_t>(same[1])];
    const auto& x5 = positions[static_cast<std::size_t>(same[2])];
    const auto& x3 = positions[static_cast<std::size_t>(other[0])];
    const auto& x4 = positions[static_cast<std::size_t>(other[1])];

    auto v = x5;
    v ^= gated_term(shrink, x1 | x2, rng);
    v ^= gated_term(shrink, x3 | x4, rng);
    return v;
}

FeatureMask local_search(const FeatureMask& best, double mean_loudness, Rng& rng)
{
    auto x = best;
    const double d = static_cast<double>(best.size());
    const double p = std::min(0.5, std::max(0.0, mean_loudness) * 2.0 / d);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (rng.uniform() < p)
            x.flip(i);
    repair_mask(x, rng);
    return x;
}

bool acceptance_step(Bat& bat, const FeatureMask& candidate, double candidate_fitness, int t, const BatConfig& cfg,
                     Rng& rng)
{
    const bool loud_enough = rng.uniform() < bat.loudness;
    if (!loud_enough || !(candidate_fitness > bat.fitness))
        return false;
    bat.position = candidate;
    bat.fitness = candidate_fitness;
    bat.loudness *= cfg.alpha;
    bat.pulse_rate = cfg.pulse_rate0 * (1.0 - std::exp(-cfg.gamma * t));
    if (candidate_fitness > bat.personal_best_fitness) {
        bat.personal_best = candidate;
        bat.personal_best_fitness = candidate_fitness;
    }
    return true;
}

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kClusterStream = 0x636c7573ULL;

double evaluate(const FitnessFunction& fitness, const FeatureMask& mask, int t, std::size_t bat)
{
    try {
        return fitness(mask);
    } catch (const std::exception& e) {
        throw DataError("fitness failed at iteration " + std::to_string(t) + ", bat " + std::to_string(bat) + ": " +
                        e.what());
    }
}

void refresh_global_best(SwarmState& s)
{
    for (const auto& b : s.bats)
        if (b.personal_best_fitness > s.global_best_fitness) {
            s.global_best = b.personal_best;
            s.global_best_fitness = b.personal_best_fitness;
        }
}

void absorb(Bat& bat, const FeatureMask& x, double f)
{
    if (f > bat.personal_best_fitness) {
        bat.personal_best = x;
        bat.personal_best_fitness = f;
    }
}

} // namespace

BatResult run_bat_search(const FitnessFunction& fitness, std::size_t dims, const BatConfig& cfg,
                         const BatRunOptions& options)
{
    cfg.validate();
    if (dims < 2)
        throw ConfigError("bat search needs at least 2 dimensions");

    const auto n = static_cast<std::size_t>(cfg.swarm_size);
    BatResult result;
    SwarmState s;
    s.bats.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::stream(cfg.seed, {kInitStream, i});
        auto& b = s.bats[i];
        b.position = FeatureMask(dims);
        for (std::size_t k = 0; k < dims; ++k)
            b.position.set(k, rng.uniform() < 0.5);
        repair_mask(b.position, rng);
        b.velocity = BitString(dims);
        b.loudness = cfg.loudness0;
        b.pulse_rate = cfg.pulse_rate0;
    }
    // Evaluation wave: no swarm state changes while fitness runs.
    for (std::size_t i = 0; i < n; ++i) {
        auto& b = s.bats[i];
        b.fitness = evaluate(fitness, b.position, 0, i);
        b.personal_best = b.position;
        b.personal_best_fitness = b.fitness;
    }
    result.evaluations += n;
    s.global_best = s.bats[0].personal_best;
    s.global_best_fitness = s.bats[0].personal_best_fitness;
    refresh_global_best(s);
    result.trace.push_back(s.global_best_fitness);
    s.groups.assignments.assign(n, 0);
    if (options.observer)
        options.observer(s);

    std::vector<FeatureMask> positions(n);
    std::vector<std::optional<FeatureMask>> local(n);
    std::vector<Rng> rngs;
    rngs.reserve(n);

    for (int t = 1; t <= cfg.iterations; ++t) {
        s.iteration = t;
        const double inertia = inertia_weight(t, cfg);
        const double self_learning = cfg.self_learning ? self_learning_factor(t, cfg) : 0.0;
        const double p_mutation = cfg.mutation ? mutation_probability(t - 1, cfg) : 0.0;
        const double shrink = shrinkage_factor(t, cfg);

        for (std::size_t i = 0; i < n; ++i)
            positions[i] = s.bats[i].position;

        // swarm division and per-group leaders
        if (cfg.subgroups > 1) {
            s.groups = balanced_kmeans(positions, cfg.subgroups,
                                       stream_seed(cfg.seed, {kClusterStream, static_cast<std::uint64_t>(t)}));
        } else {
            s.groups = ClusterAssignment{};
            s.groups.assignments.assign(n, 0);
            s.groups.centroids = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(dims));
        }
        const auto members = s.groups.members();
        s.local_best.assign(members.size(), -1);
        for (std::size_t g = 0; g < members.size(); ++g) {
            int best = members[g].front();
            for (int i : members[g])
                if (s.bats[static_cast<std::size_t>(i)].fitness > s.bats[static_cast<std::size_t>(best)].fitness)
                    best = i;
            s.local_best[g] = best;
        }

        double mean_loudness = 0.0;
        for (const auto& b : s.bats)
            mean_loudness += b.loudness;
        mean_loudness /= static_cast<double>(n);
        const FeatureMask global_best = s.global_best;

        // Movement: velocities, positions and local-search candidates.
        rngs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            rngs.push_back(Rng::stream(cfg.seed, {static_cast<std::uint64_t>(t), i}));
            Rng& rng = rngs.back();
            auto& b = s.bats[i];
            const auto g = static_cast<std::size_t>(s.groups.assignments[i]);
            const int leader = s.local_best[g];
            const FeatureMask& anchor =
                leader == static_cast<int>(i) ? global_best : positions[static_cast<std::size_t>(leader)];

            b.frequency = cfg.freq_min + (cfg.freq_max - cfg.freq_min) * rng.uniform();
            b.velocity = update_velocity(b, anchor, inertia, self_learning, rng);
            b.position = update_position(b.position, b.velocity, rng);
            local[i].reset();
            if (rng.uniform() > b.pulse_rate)
                local[i] = local_search(global_best, mean_loudness, rng);
        }

        // Evaluation wave.
        std::vector<double> moved(n), searched(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            moved[i] = evaluate(fitness, s.bats[i].position, t, i);
            ++result.evaluations;
            if (local[i]) {
                searched[i] = evaluate(fitness, *local[i], t, i);
                ++result.evaluations;
            }
        }

        // Acceptance and mutation.
        for (std::size_t i = 0; i < n; ++i) {
            auto& b = s.bats[i];
            Rng& rng = rngs[i];
            b.fitness = moved[i];
            absorb(b, b.position, b.fitness);
            if (local[i])
                acceptance_step(b, *local[i], searched[i], t, cfg, rng);

            if (rng.uniform() < p_mutation) {
                const auto g = static_cast<std::size_t>(s.groups.assignments[i]);
                std::vector<int> others;
                for (std::size_t h = 0; h < members.size(); ++h)
                    if (h != g)
                        others.insert(others.end(), members[h].begin(), members[h].end());
                if (auto v = differential_mutation(static_cast<int>(i), members[g], others, positions, shrink, rng))
                    b.velocity = *v;
            }
        }

        refresh_global_best(s);
        result.trace.push_back(s.global_best_fitness);
        if (options.observer)
            options.observer(s);
    }

    result.best = s.global_best;
    result.best_fitness = s.global_best_fitness;
    return result;
}

} // namespace flowgate
