#include "flowgate/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace flowgate {

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

std::vector<FlowClass> DecisionTree::predict_batch(const Eigen::MatrixXd& x) const
{
    std::vector<FlowClass> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        out[static_cast<std::size_t>(r)] = predict(x.row(r));
    return out;
}

int DecisionTree::depth() const
{
    if (nodes_.empty())
        return 0;
    std::function<int(int)> walk = [&](int i) -> int {
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        return n.is_leaf() ? 0 : 1 + std::max(walk(n.left), walk(n.right));
    };
    return walk(0);
}

FlowClass majority_class(const ClassHistogram& h) noexcept
{
    std::size_t best = 0;
    for (std::size_t j = 1; j < kNumClasses; ++j)
        if (h[j] > h[best])
            best = j;
    return static_cast<FlowClass>(best);
}

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0; // sum over children of sum_k c_k^2 / n_child; larger is purer
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, std::span<const FlowClass> y, const FeatureMask& mask,
                const TreeConfig& cfg, Rng& rng)
        : x_(x), y_(y), cfg_(cfg), rng_(rng), features_(mask.indices())
    {
        const auto available = static_cast<int>(features_.size());
        mtry_ = cfg.max_features > 0 ? std::min(cfg.max_features, available)
                                     : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(available))));
        mtry_ = std::max(1, std::min(mtry_, available));
        min_leaf_ = static_cast<std::size_t>(std::max(1, cfg.min_samples_leaf));
    }

    std::vector<DecisionTree::Node> build(std::vector<std::size_t> sample)
    {
        grow(sample, 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<std::size_t>& idx, int depth)
    {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        ClassHistogram h{};
        for (auto i : idx)
            ++h[code(y_[i])];
        nodes_[static_cast<std::size_t>(id)].histogram = h;
        nodes_[static_cast<std::size_t>(id)].label = majority_class(h);

        const bool pure = std::count_if(h.begin(), h.end(), [](auto c) { return c > 0; }) <= 1;
        const bool depth_capped = cfg_.max_depth >= 0 && depth >= cfg_.max_depth;
        if (pure || depth_capped || idx.size() < 2 * min_leaf_ || features_.empty())
            return id;

        const Split split = best_split(idx);
        if (split.feature < 0)
            return id;

        std::vector<std::size_t> left, right;
        for (auto i : idx)
            (x_(static_cast<Eigen::Index>(i), split.feature) <= split.threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        nodes_[static_cast<std::size_t>(id)].feature = split.feature;
        nodes_[static_cast<std::size_t>(id)].threshold = split.threshold;
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = l;
        nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    Split best_split(const std::vector<std::size_t>& idx)
    {
        // Random candidate order; the first mtry are the sampled features. If
        // none of them admits a split, keep scanning the rest.
        std::vector<int> order = features_;
        for (std::size_t k = 0; k < order.size(); ++k)
            std::swap(order[k], order[k + rng_.below(order.size() - k)]);

        Split best;
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k >= static_cast<std::size_t>(mtry_) && best.feature >= 0)
                break;
            scan_feature(order[k], idx, best);
        }
        return best;
    }

    void scan_feature(int f, const std::vector<std::size_t>& idx, Split& best)
    {
        pairs_.clear();
        for (auto i : idx)
            pairs_.emplace_back(x_(static_cast<Eigen::Index>(i), f), code(y_[i]));
        std::sort(pairs_.begin(), pairs_.end());

        std::array<double, kNumClasses> right{}, left{};
        for (const auto& p : pairs_)
            right[p.second] += 1.0;
        const std::size_t n = pairs_.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto c = pairs_[i].second;
            left[c] += 1.0;
            right[c] -= 1.0;
            const double a = pairs_[i].first;
            const double b = pairs_[i + 1].first;
            if (!(a < b))
                continue;
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < min_leaf_ || nr < min_leaf_)
                continue;
            double sl = 0.0, sr = 0.0;
            for (std::size_t j = 0; j < kNumClasses; ++j) {
                sl += left[j] * left[j];
                sr += right[j] * right[j];
            }
            const double score = sl / static_cast<double>(nl) + sr / static_cast<double>(nr);
            if (score > best.score) {
                double mid = a + (b - a) / 2.0;
                if (!(mid < b))
                    mid = a;
                best = {f, mid, score};
            }
        }
    }

    const Eigen::MatrixXd& x_;
    std::span<const FlowClass> y_;
    const TreeConfig& cfg_;
    Rng& rng_;
    std::vector<int> features_;
    int mtry_ = 1;
    std::size_t min_leaf_ = 1;
    std::vector<DecisionTree::Node> nodes_;
    std::vector<std::pair<double, std::size_t>> pairs_;
};

} // namespace

DecisionTree train_tree(const Eigen::MatrixXd& x, std::span<const FlowClass> y, std::span<const std::size_t> sample,
                        const FeatureMask& mask, const TreeConfig& cfg, Rng& rng)
{
    TreeBuilder builder(x, y, mask, cfg, rng);
    return DecisionTree(builder.build(std::vector<std::size_t>(sample.begin(), sample.end())));
}

} // namespace flowgate
