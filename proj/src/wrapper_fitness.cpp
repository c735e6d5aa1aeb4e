#include "flowgate/wrapper_fitness.hpp"

#include <string>

#include "flowgate/error.hpp"

namespace flowgate {

double wrapper_fitness(const FeatureMask& mask, const EncodedDataset& train, const EncodedDataset& valid,
                       double lambda, std::uint64_t eval_seed)
{
    if (mask.none())
        throw DataError("wrapper_fitness: empty mask");
    if (mask.size() != train.cols() || valid.cols() != train.cols())
        throw DataError("wrapper_fitness: mask and datasets disagree on feature count");
    if (valid.rows() == 0 || train.rows() == 0)
        throw DataError("wrapper_fitness: empty train or validation set");

    const double penalty = lambda * static_cast<double>(mask.popcount()) / static_cast<double>(mask.size());

    // The probe sees every masked feature at each node, so eval_seed only
    // matters for tie-breaking in the candidate order.
    TreeConfig probe;
    probe.max_depth = kProbeDepth;
    probe.min_samples_leaf = 1;
    probe.max_features = static_cast<int>(mask.popcount());

    std::vector<std::size_t> all(train.rows());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    Rng rng(eval_seed);
    // A single-class training set yields a one-leaf tree that predicts the
    // majority class, which is the degenerate fallback.
    const auto tree = train_tree(train.features, train.labels, all, mask, probe, rng);

    std::size_t hit = 0;
    for (Eigen::Index r = 0; r < valid.features.rows(); ++r)
        hit += tree.predict(valid.features.row(r)) == valid.labels[static_cast<std::size_t>(r)];
    return static_cast<double>(hit) / static_cast<double>(valid.rows()) - penalty;
}

WrapperFitness::WrapperFitness(EncodedDataset train, EncodedDataset valid, double lambda, std::uint64_t eval_seed)
    : train_(std::make_shared<const EncodedDataset>(std::move(train))),
      valid_(std::make_shared<const EncodedDataset>(std::move(valid))), lambda_(lambda), eval_seed_(eval_seed),
      cache_(std::make_shared<Cache>())
{
}

double WrapperFitness::operator()(const FeatureMask& mask) const
{
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->values.find(mask); it != cache_->values.end())
            return it->second;
    }
    const double f = wrapper_fitness(mask, *train_, *valid_, lambda_, eval_seed_);
    std::lock_guard lock(cache_->mutex);
    cache_->values.emplace(mask, f);
    return f;
}

std::size_t WrapperFitness::distinct_evaluations() const
{
    std::lock_guard lock(cache_->mutex);
    return cache_->values.size();
}

} // namespace flowgate
