#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "flowgate/balanced_kmeans.hpp"
#include "flowgate/bit_string.hpp"
#include "flowgate/rng.hpp"

namespace flowgate {

/// Parameters of the binary bat search.
struct BatConfig {
    int swarm_size = 40;  // N
    int subgroups = 4;    // K
    int iterations = 100; // N_t
    double w_max = 0.9;
    double w_min = 0.4;
    double c_max = 1.5;
    double c_min = 0.5;
    double shrink_max = 1.0; // F_max
    double shrink_min = 0.2; // F_min
    double freq_min = 0.0;
    double freq_max = 1.0;
    double alpha = 0.9;   // loudness decay on acceptance
    double gamma = 0.9;   // pulse-rate growth
    double lambda = 0.01; // feature-count penalty used by wrapper_fitness
    double loudness0 = 1.0;
    double pulse_rate0 = 0.5;
    bool mutation = true;      // binary differential mutation on/off
    bool self_learning = true; // personal-best attraction on/off
    std::uint64_t seed = 1;

    /// Throws ConfigError when a bound is violated.
    void validate() const;

    /// Single group, no mutation, no personal-best term: the classic binary bat search.
    static BatConfig baseline();
    bool is_baseline() const noexcept { return subgroups == 1 && !mutation && !self_learning; }
};

// Time-varying control factors. t is the iteration index.
double inertia_weight(int t, const BatConfig& cfg);
double self_learning_factor(int t, const BatConfig& cfg);
double mutation_probability(int t, const BatConfig& cfg);
double shrinkage_factor(int t, const BatConfig& cfg);

/// Higher is better. Must be a pure function of the mask.
using FitnessFunction = std::function<double(const FeatureMask&)>;

struct Bat {
    FeatureMask position;
    BitString velocity;
    double frequency = 0.0;
    double loudness = 1.0;
    double pulse_rate = 0.0;
    double fitness = 0.0;
    FeatureMask personal_best;
    double personal_best_fitness = 0.0;
};

struct SwarmState {
    std::vector<Bat> bats;
    ClusterAssignment groups;
    std::vector<int> local_best; // bat index of each group's best
    FeatureMask global_best;
    double global_best_fitness = 0.0;
    int iteration = 0;
};

/// `bits` with probability clamp(coeff, 0, 1), otherwise all zeros. One draw per call.
BitString gated_term(double coeff, const BitString& bits, Rng& rng);

/// v' = [W]v XOR [f](x XOR anchor) XOR [C](x XOR P), each bracket a Bernoulli gate.
/// The anchor is the group best for ordinary bats and the global best for group leaders.
BitString update_velocity(const Bat& bat, const FeatureMask& anchor, double inertia, double self_learning,
                          Rng& rng);

/// Sets one uniformly chosen bit if the mask is empty.
void repair_mask(FeatureMask& mask, Rng& rng);

/// x XOR v, repaired if empty.
FeatureMask update_position(const FeatureMask& position, const BitString& velocity, Rng& rng);

/// Binary differential mutation:
///   x_r5 XOR [F](x_r1 OR x_r2) XOR [F](x_r3 OR x_r4)
/// with r1, r2, r5 drawn from `same_group` and r3, r4 from `other_groups`, all
/// distinct and different from `target`. Returns nullopt (no-op) when the
/// groups are too small to draw from.
std::optional<BitString> differential_mutation(int target, std::span<const int> same_group,
                                               std::span<const int> other_groups,
                                               std::span<const FeatureMask> positions, double shrink, Rng& rng);

/// Copy of `best` with each bit flipped with probability min(0.5, 2 * loudness / d).
FeatureMask local_search(const FeatureMask& best, double mean_loudness, Rng& rng);

/// Loudness-gated greedy acceptance. Returns true if the candidate replaced the position.
bool acceptance_step(Bat& bat, const FeatureMask& candidate, double candidate_fitness, int t,
                     const BatConfig& cfg, Rng& rng);

struct BatResult {
    FeatureMask best;
    double best_fitness = 0.0;
    std::vector<double> trace; // best-so-far after init and after each iteration
    std::size_t evaluations = 0;
};

struct BatRunOptions {
    /// Called after initialization and after every iteration.
    std::function<void(const SwarmState&)> observer;
};

/// Runs the improved binary bat search over masks of width `dims`.
BatResult run_bat_search(const FitnessFunction& fitness, std::size_t dims, const BatConfig& cfg,
                         const BatRunOptions& options = {});

} // namespace flowgate
