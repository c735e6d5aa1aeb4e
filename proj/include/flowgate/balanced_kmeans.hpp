#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "flowgate/bit_string.hpp"

namespace flowgate {

/// Result of size-balanced k-means.
struct ClusterAssignment {
    std::vector<int> assignments; // per point, in [0, K)
    Eigen::MatrixXd centroids;    // K x d
    int iterations = 0;
    double cost = 0.0; // sum of squared distances to assigned centroids

    int clusters() const noexcept { return static_cast<int>(centroids.rows()); }
    std::vector<int> sizes() const;
    std::vector<std::vector<int>> members() const;
};

/// Partitions the rows of `points` into K groups whose sizes differ by at most
/// one. Centroids start from seeded farthest-point sampling; each round assigns
/// (point, centroid) pairs in ascending squared distance while the centroid
/// still has room, then recenters. Stops when the assignment is stable, the
/// cost stops decreasing, or after `max_rounds`.
ClusterAssignment balanced_kmeans(const Eigen::MatrixXd& points, int K, std::uint64_t seed, int max_rounds = 100);

/// Bit strings are clustered as 0/1 vectors (squared distance = Hamming distance).
ClusterAssignment balanced_kmeans(const std::vector<BitString>& points, int K, std::uint64_t seed,
                                  int max_rounds = 100);

/// One capacity-constrained assignment pass against fixed centroids.
std::vector<int> capacity_assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids);

} // namespace flowgate
