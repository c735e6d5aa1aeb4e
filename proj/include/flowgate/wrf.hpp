#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "flowgate/bit_string.hpp"
#include "flowgate/dataset.hpp"
#include "flowgate/decision_tree.hpp"
#include "flowgate/rng.hpp"

namespace flowgate {

/// Per-sample selection probabilities. Positive, summing to one.
using SampleWeights = Eigen::VectorXd;

/// Rows are classes, columns are trees.
using AccuracyMatrix = Eigen::Matrix<double, static_cast<int>(kNumClasses), Eigen::Dynamic>;

/// Prior mass of each class in the initial sample weights.
struct ClassWeightProfile {
    std::array<double, kNumClasses> weights{0.3, 0.15, 0.35, 0.05, 0.15};

    /// weights[j] = N_j / N, which makes every sample weight 1/N.
    static ClassWeightProfile uniform(const ClassCounts& counts);
    void validate() const;
};

struct ForestConfig {
    int trees = 100;
    TreeConfig tree;
    ClassWeightProfile profile;
    bool uniform_profile = false; // ignore `profile`, use class frequencies
    bool weight_updates = true;   // per-tree boosting of sample weights
    bool weighted_vote = true;    // false: accuracy matrix fixed at one (plain majority vote)
    bool invert_majority_beta = false;
    double holdout_fraction = 0.0; // > 0: measure tree accuracy on a held-out share of the data

    void validate() const;
    static ForestConfig baseline();
    bool is_baseline() const noexcept { return uniform_profile && !weight_updates && !weighted_vote; }
};

/// w_i = profile[j] / N_j for a sample of class j.
SampleWeights init_weights(std::span<const FlowClass> labels, const ClassWeightProfile& profile);

/// `count` draws with replacement, index i chosen with probability w_i.
std::vector<std::size_t> roulette_sample(const SampleWeights& weights, std::size_t count, Rng& rng);

struct TreeAccuracy {
    double error = 0.0;
    double alpha = 0.0; // 0.5 ln((1 - e) / e)
};

inline constexpr double kErrorClamp = 1e-6;

/// Error-rate based accuracy; the error is clamped to [1e-6, 1 - 1e-6].
TreeAccuracy accuracy_from_error(double error) noexcept;
TreeAccuracy tree_accuracy(std::span<const FlowClass> predictions, std::span<const FlowClass> truth);

/// Class/correctness multiplier. `majority_mass` and `minority_mass` are the
/// current total weights of the majority and minority classes.
double beta_factor(bool majority, bool correct, double majority_mass, double minority_mass,
                   bool invert_majority = false) noexcept;

/// A class is in the majority when its current total weight exceeds 1/5.
std::array<bool, kNumClasses> majority_partition(const SampleWeights& weights, std::span<const FlowClass> labels);

/// Multiplies each weight by beta * exp(+alpha) when misclassified and by
/// beta * exp(-alpha) when correct, then renormalizes to unit sum.
SampleWeights update_weights(const SampleWeights& weights, std::span<const FlowClass> predictions,
                             std::span<const FlowClass> truth, double alpha, bool invert_majority = false);

/// Fraction of each class's samples predicted correctly. Throws if a class is absent.
Eigen::Matrix<double, static_cast<int>(kNumClasses), 1> per_class_accuracy(std::span<const FlowClass> predictions,
                                                                           std::span<const FlowClass> truth);

struct Forest {
    std::vector<DecisionTree> trees;
    AccuracyMatrix accuracy;
    FeatureMask mask;
    ForestConfig config;
    std::size_t feature_count = 0;
};

/// argmax_j sum_m accuracy(j, m) [tree m predicts j]; ties go to the lowest code.
template <typename Row>
FlowClass weighted_vote(const Forest& forest, const Row& x)
{
    std::array<double, kNumClasses> score{};
    for (std::size_t m = 0; m < forest.trees.size(); ++m) {
        const auto j = code(forest.trees[m].predict(x));
        score[j] += forest.accuracy(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m));
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < kNumClasses; ++j)
        if (score[j] > score[best])
            best = j;
    return class_from_code(best);
}

std::vector<FlowClass> predict_batch(const Forest& forest, const Eigen::MatrixXd& x);
std::vector<FlowClass> predict_batch(const Forest& forest, const EncodedDataset& ds);

struct FitObserver {
    /// Called with the tree index and the weights after that tree's update.
    std::function<void(int, const SampleWeights&)> on_weights;
};

/// Trains the cost-sensitive forest.
Forest fit_forest(const EncodedDataset& ds, const FeatureMask& mask, const ForestConfig& cfg, std::uint64_t seed,
                  const FitObserver& observer = {});

} // namespace flowgate
