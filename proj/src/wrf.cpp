#include "flowgate/wrf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "flowgate/error.hpp"

namespace flowgate {

ClassWeightProfile ClassWeightProfile::uniform(const ClassCounts& counts)
{
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    ClassWeightProfile p;
    for (std::size_t j = 0; j < kNumClasses; ++j)
        p.weights[j] = static_cast<double>(counts[j]) / total;
    return p;
}

void ClassWeightProfile::validate() const
{
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ConfigError("class weights must be finite and non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("class weights must sum to 1, got " + std::to_string(sum));
}

void ForestConfig::validate() const
{
    if (trees < 1)
        throw ConfigError("forest needs at least one tree");
    if (tree.min_samples_leaf < 1)
        throw ConfigError("min_samples_leaf must be >= 1");
    if (tree.max_features < 0)
        throw ConfigError("max_features must be >= 0");
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
        throw ConfigError("holdout_fraction must be in [0, 1)");
    if (!uniform_profile)
        profile.validate();
}

ForestConfig ForestConfig::baseline()
{
    ForestConfig cfg;
    cfg.uniform_profile = true;
    cfg.weight_updates = false;
    cfg.weighted_vote = false;
    return cfg;
}

SampleWeights init_weights(std::span<const FlowClass> labels, const ClassWeightProfile& profile)
{
    ClassCounts counts{};
    for (auto l : labels)
        ++counts[code(l)];
    for (std::size_t j = 0; j < kNumClasses; ++j)
        if (profile.weights[j] > 0.0 && counts[j] == 0)
            throw DataError("class " + std::string(class_name(class_from_code(j))) +
                            " has prior weight but no samples");

    SampleWeights w(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto j = code(labels[i]);
        w[static_cast<Eigen::Index>(i)] = profile.weights[j] / static_cast<double>(counts[j]);
    }
    return w;
}

std::vector<std::size_t> roulette_sample(const SampleWeights& weights, std::size_t count, Rng& rng)
{
    std::vector<double> cumulative(static_cast<std::size_t>(weights.size()));
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    const double total = cumulative.back();

    std::vector<std::size_t> out(count);
    for (auto& o : out) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end())
            --it;
        // skip zero-width slots that upper_bound can land on at the boundary
        while (it != cumulative.begin() && *it == *(it - 1))
            --it;
        o = static_cast<std::size_t>(it - cumulative.begin());
    }
    return out;
}

TreeAccuracy accuracy_from_error(double error) noexcept
{
    const double e = std::clamp(error, kErrorClamp, 1.0 - kErrorClamp);
    return {error, 0.5 * std::log((1.0 - e) / e)};
}

TreeAccuracy tree_accuracy(std::span<const FlowClass> predictions, std::span<const FlowClass> truth)
{
    if (predictions.size() != truth.size() || truth.empty())
        throw DataError("tree_accuracy: predictions and truth must be aligned and non-empty");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        wrong += predictions[i] != truth[i];
    return accuracy_from_error(static_cast<double>(wrong) / static_cast<double>(truth.size()));
}

double beta_factor(bool majority, bool correct, double majority_mass, double minority_mass,
                   bool invert_majority) noexcept
{
    const double diff = std::clamp(majority_mass - minority_mass, -10.0, 10.0);
    // exponent sign per (class group, correctness) cell: +1 means 2^(m-n)
    bool positive;
    if (majority)
        positive = invert_majority ? !correct : correct;
    else
        positive = !correct;
    return std::exp2(positive ? diff : -diff);
}

std::array<bool, kNumClasses> majority_partition(const SampleWeights& weights, std::span<const FlowClass> labels)
{
    std::array<double, kNumClasses> mass{};
    for (std::size_t i = 0; i < labels.size(); ++i)
        mass[code(labels[i])] += weights[static_cast<Eigen::Index>(i)];
    std::array<bool, kNumClasses> majority{};
    for (std::size_t j = 0; j < kNumClasses; ++j)
        majority[j] = mass[j] > 1.0 / static_cast<double>(kNumClasses);
    return majority;
}

SampleWeights update_weights(const SampleWeights& weights, std::span<const FlowClass> predictions,
                             std::span<const FlowClass> truth, double alpha, bool invert_majority)
{
    if (predictions.size() != truth.size() || truth.size() != static_cast<std::size_t>(weights.size()))
        throw DataError("update_weights: weights, predictions and truth must be aligned");

    const auto majority = majority_partition(weights, truth);
    double m = 0.0, n = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        (majority[code(truth[i])] ? m : n) += weights[static_cast<Eigen::Index>(i)];

    // four possible multipliers
    double factor[2][2];
    for (int maj = 0; maj < 2; ++maj)
        for (int ok = 0; ok < 2; ++ok)
            factor[maj][ok] = beta_factor(maj, ok, m, n, invert_majority) * std::exp(ok ? -alpha : alpha);

    SampleWeights next(weights.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool ok = predictions[i] == truth[i];
        next[static_cast<Eigen::Index>(i)] =
            weights[static_cast<Eigen::Index>(i)] * factor[majority[code(truth[i])]][ok];
    }
    const double z = next.sum();
    if (!(z > 0.0) || !std::isfinite(z))
        throw std::logic_error("update_weights: normalizer is " + std::to_string(z));
    next /= z;
    return next;
}

Eigen::Matrix<double, static_cast<int>(kNumClasses), 1> per_class_accuracy(std::span<const FlowClass> predictions,
                                                                           std::span<const FlowClass> truth)
{
    if (predictions.size() != truth.size())
        throw DataError("per_class_accuracy: predictions and truth differ in length");
    std::array<double, kNumClasses> hit{}, total{};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto j = code(truth[i]);
        total[j] += 1.0;
        hit[j] += predictions[i] == truth[i];
    }
    Eigen::Matrix<double, static_cast<int>(kNumClasses), 1> row;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        if (total[j] == 0.0)
            throw DataError("per_class_accuracy: class " + std::string(class_name(class_from_code(j))) +
                            " has no samples");
        row[static_cast<Eigen::Index>(j)] = hit[j] / total[j];
    }
    return row;
}

std::vector<FlowClass> predict_batch(const Forest& forest, const Eigen::MatrixXd& x)
{
    if (static_cast<std::size_t>(x.cols()) != forest.feature_count)
        throw DataError("model expects " + std::to_string(forest.feature_count) + " features, data has " +
                        std::to_string(x.cols()));
    std::vector<FlowClass> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        out[static_cast<std::size_t>(r)] = weighted_vote(forest, x.row(r));
    return out;
}

std::vector<FlowClass> predict_batch(const Forest& forest, const EncodedDataset& ds)
{
    return predict_batch(forest, ds.features);
}

namespace {

constexpr std::uint64_t kHoldoutStream = 0x686f6c64ULL;

// Stratified holdout: round(fraction * N_j) rows of each class, at least one
// when the class has two or more rows, never all of them.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(std::span<const FlowClass> labels,
                                                                            double fraction, std::uint64_t seed)
{
    std::array<std::vector<std::size_t>, kNumClasses> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
        rows[code(labels[i])].push_back(i);
    std::vector<std::size_t> fit, held;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        auto& r = rows[j];
        Rng rng = Rng::stream(seed, {kHoldoutStream, j});
        for (std::size_t k = 0; k + 1 < r.size(); ++k)
            std::swap(r[k], r[k + rng.below(r.size() - k)]);
        auto h = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(r.size())));
        if (r.size() >= 2)
            h = std::clamp<std::size_t>(h, 1, r.size() - 1);
        else
            h = 0;
        held.insert(held.end(), r.begin(), r.begin() + static_cast<std::ptrdiff_t>(h));
        fit.insert(fit.end(), r.begin() + static_cast<std::ptrdiff_t>(h), r.end());
    }
    std::sort(fit.begin(), fit.end());
    std::sort(held.begin(), held.end());
    return {fit, held};
}

} // namespace

Forest fit_forest(const EncodedDataset& ds, const FeatureMask& mask, const ForestConfig& cfg, std::uint64_t seed,
                  const FitObserver& observer)
{
    cfg.validate();
    ds.validate();
    if (mask.size() != ds.cols())
        throw DataError("mask width " + std::to_string(mask.size()) + " != feature count " +
                        std::to_string(ds.cols()));
    if (mask.none())
        throw DataError("mask selects no features");
    if (ds.rows() == 0)
        throw DataError("cannot fit on an empty dataset");

    EncodedDataset fit_part, measure_part;
    const EncodedDataset* fit_set = &ds;
    const EncodedDataset* measure_set = &ds;
    if (cfg.holdout_fraction > 0.0) {
        auto [fit_rows, held_rows] = holdout_split(ds.labels, cfg.holdout_fraction, seed);
        fit_part = ds.subset(fit_rows);
        measure_part = ds.subset(held_rows);
        fit_set = &fit_part;
        measure_set = &measure_part;
    }

    const auto profile = cfg.uniform_profile ? ClassWeightProfile::uniform(fit_set->class_counts) : cfg.profile;
    SampleWeights w = init_weights(fit_set->labels, profile);

    Forest forest;
    forest.mask = mask;
    forest.config = cfg;
    forest.feature_count = ds.cols();
    forest.accuracy = AccuracyMatrix::Ones(static_cast<int>(kNumClasses), cfg.trees);
    forest.trees.reserve(static_cast<std::size_t>(cfg.trees));

    for (int m = 0; m < cfg.trees; ++m) {
        try {
            Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(m)});
            const auto sample = roulette_sample(w, fit_set->rows(), rng);
            forest.trees.push_back(train_tree(fit_set->features, fit_set->labels, sample, mask, cfg.tree, rng));
            const auto& tree = forest.trees.back();

            if (!cfg.weighted_vote && !cfg.weight_updates)
                continue;
            const auto measured = tree.predict_batch(measure_set->features);
            if (cfg.weighted_vote)
                forest.accuracy.col(m) = per_class_accuracy(measured, measure_set->labels);
            if (cfg.weight_updates) {
                const double alpha = tree_accuracy(measured, measure_set->labels).alpha;
                const auto fitted = measure_set == fit_set ? measured : tree.predict_batch(fit_set->features);
                w = update_weights(w, fitted, fit_set->labels, alpha, cfg.invert_majority_beta);
                if (observer.on_weights)
                    observer.on_weights(m, w);
            }
        } catch (const DataError& e) {
            throw DataError("tree " + std::to_string(m) + ": " + e.what());
        }
    }
    return forest;
}

} // namespace flowgate
