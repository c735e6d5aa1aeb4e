#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include "flowgate/bit_string.hpp"
#include "flowgate/dataset.hpp"
#include "flowgate/decision_tree.hpp"

namespace flowgate {

inline constexpr int kProbeDepth = 10;

/// Validation accuracy of a depth-10 CART probe trained on the masked
/// features of `train`, minus lambda * popcount / d.
double wrapper_fitness(const FeatureMask& mask, const EncodedDataset& train, const EncodedDataset& valid,
                       double lambda, std::uint64_t eval_seed);

/// Memoizing wrapper fitness over fixed train/validation sets. Copies share the cache.
class WrapperFitness {
public:
    WrapperFitness(EncodedDataset train, EncodedDataset valid, double lambda, std::uint64_t eval_seed);

    double operator()(const FeatureMask& mask) const;

    std::size_t distinct_evaluations() const;
    std::size_t dims() const noexcept { return train_->cols(); }

private:
    struct Cache {
        std::mutex mutex;
        std::map<FeatureMask, double> values;
    };
    std::shared_ptr<const EncodedDataset> train_;
    std::shared_ptr<const EncodedDataset> valid_;
    double lambda_;
    std::uint64_t eval_seed_;
    std::shared_ptr<Cache> cache_;
};

} // namespace flowgate
