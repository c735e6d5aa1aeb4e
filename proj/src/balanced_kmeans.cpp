#include "flowgate/balanced_kmeans.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "flowgate/error.hpp"
#include "flowgate/rng.hpp"

namespace flowgate {

std::vector<int> ClusterAssignment::sizes() const
{
    std::vector<int> s(static_cast<std::size_t>(clusters()), 0);
    for (int a : assignments)
        ++s[static_cast<std::size_t>(a)];
    return s;
}

std::vector<std::vector<int>> ClusterAssignment::members() const
{
    std::vector<std::vector<int>> m(static_cast<std::size_t>(clusters()));
    for (std::size_t i = 0; i < assignments.size(); ++i)
        m[static_cast<std::size_t>(assignments[i])].push_back(static_cast<int>(i));
    return m;
}

std::vector<int> capacity_assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids)
{
    const auto n = points.rows();
    const auto k = centroids.rows();
    const auto floor_cap = n / k;
    auto extra_slots = n % k; // this many groups may hold floor_cap + 1

    struct Pair {
        double dist;
        Eigen::Index point;
        Eigen::Index cluster;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(n * k));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < k; ++c)
            pairs.push_back({(points.row(i) - centroids.row(c)).squaredNorm(), i, c});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.dist, a.point, a.cluster) < std::tie(b.dist, b.point, b.cluster);
    });

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    std::vector<Eigen::Index> size(static_cast<std::size_t>(k), 0);
    Eigen::Index placed = 0;
    for (const auto& p : pairs) {
        auto& slot = assign[static_cast<std::size_t>(p.point)];
        if (slot >= 0)
            continue;
        auto& s = size[static_cast<std::size_t>(p.cluster)];
        if (s < floor_cap) {
            ++s;
        } else if (s == floor_cap && extra_slots > 0) {
            ++s;
            --extra_slots;
        } else {
            continue;
        }
        slot = static_cast<int>(p.cluster);
        if (++placed == n)
            break;
    }
    return assign;
}

namespace {

Eigen::MatrixXd recenter(const Eigen::MatrixXd& points, const std::vector<int>& assign, Eigen::Index k)
{
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const auto a = assign[static_cast<std::size_t>(i)];
        c.row(a) += points.row(i);
        count[a] += 1.0;
    }
    for (Eigen::Index j = 0; j < k; ++j)
        c.row(j) /= count[j]; // every group is non-empty since K <= N
    return c;
}

double within_cost(const Eigen::MatrixXd& points, const std::vector<int>& assign, const Eigen::MatrixXd& centroids)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        s += (points.row(i) - centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
    return s;
}

Eigen::MatrixXd farthest_point_init(const Eigen::MatrixXd& points, Eigen::Index k, std::uint64_t seed)
{
    const auto n = points.rows();
    Rng rng(stream_seed(seed, {0x6b6d65616e73ULL}));
    Eigen::MatrixXd c(k, points.cols());
    c.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd nearest(n);
    for (Eigen::Index i = 0; i < n; ++i)
        nearest[i] = (points.row(i) - c.row(0)).squaredNorm();
    for (Eigen::Index j = 1; j < k; ++j) {
        Eigen::Index far = 0;
        nearest.maxCoeff(&far); // first maximum on ties
        c.row(j) = points.row(far);
        for (Eigen::Index i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], (points.row(i) - c.row(j)).squaredNorm());
    }
    return c;
}

} // namespace

ClusterAssignment balanced_kmeans(const Eigen::MatrixXd& points, int K, std::uint64_t seed, int max_rounds)
{
    const auto n = points.rows();
    if (K <= 0)
        throw ConfigError("balanced_kmeans: K must be at least 1");
    if (K > n)
        throw ConfigError("balanced_kmeans: K = " + std::to_string(K) + " exceeds point count " +
                          std::to_string(n));

    ClusterAssignment out;
    if (K == 1) {
        out.assignments.assign(static_cast<std::size_t>(n), 0);
        out.centroids = points.colwise().mean();
        out.cost = within_cost(points, out.assignments, out.centroids);
        return out;
    }

    auto centroids = farthest_point_init(points, K, seed);
    auto assign = capacity_assign(points, centroids);
    centroids = recenter(points, assign, K);
    double cost = within_cost(points, assign, centroids);
    int rounds = 1;
    while (rounds < max_rounds) {
        auto next = capacity_assign(points, centroids);
        if (next == assign)
            break;
        auto next_centroids = recenter(points, next, K);
        const double next_cost = within_cost(points, next, next_centroids);
        if (!(next_cost < cost))
            break;
        assign = std::move(next);
        centroids = std::move(next_centroids);
        cost = next_cost;
        ++rounds;
    }

    out.assignments = std::move(assign);
    out.centroids = std::move(centroids);
    out.iterations = rounds;
    out.cost = cost;
    return out;
}

ClusterAssignment balanced_kmeans(const std::vector<BitString>& points, int K, std::uint64_t seed, int max_rounds)
{
    if (points.empty())
        throw ConfigError("balanced_kmeans: no points");
    const auto d = points.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != d)
            throw ConfigError("balanced_kmeans: bit strings have unequal widths");
        m.row(static_cast<Eigen::Index>(i)) = points[i].to_vector().transpose();
    }
    return balanced_kmeans(m, K, seed, max_rounds);
}

} // namespace flowgate
