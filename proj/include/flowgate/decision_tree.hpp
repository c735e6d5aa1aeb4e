#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "flowgate/bit_string.hpp"
#include "flowgate/dataset.hpp"
#include "flowgate/rng.hpp"

namespace flowgate {

struct TreeConfig {
    int max_depth = 20;       // < 0 means unbounded
    int min_samples_leaf = 2; // each child of a split keeps at least this many samples
    int max_features = 0;     // candidates per node; 0 means ceil(sqrt(popcount(mask)))
};

using ClassHistogram = std::array<std::uint32_t, kNumClasses>;

/// CART classification tree with Gini splits over a feature mask.
class DecisionTree {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        FlowClass label = FlowClass::Normal;
        ClassHistogram histogram{};

        bool is_leaf() const noexcept { return feature < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };

    DecisionTree() = default;
    explicit DecisionTree(std::vector<Node> nodes);

    /// Samples with x[feature] <= threshold go left.
    template <typename Row>
    FlowClass predict(const Row& x) const
    {
        int i = 0;
        while (!nodes_[i].is_leaf())
            i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
        return nodes_[i].label;
    }

    std::vector<FlowClass> predict_batch(const Eigen::MatrixXd& x) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    int depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<Node> nodes_;
};

/// Majority label; ties go to the lowest class code.
FlowClass majority_class(const ClassHistogram& h) noexcept;

/// Grows a tree on rows `sample` (repeats allowed) of `x`, considering only
/// features set in `mask`.
DecisionTree train_tree(const Eigen::MatrixXd& x, std::span<const FlowClass> y, std::span<const std::size_t> sample,
                        const FeatureMask& mask, const TreeConfig& cfg, Rng& rng);

} // namespace flowgate
