#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>

#include <Eigen/Core>

#include "flowgate/dataset.hpp"

namespace flowgate {

constexpr int kClassesI = static_cast<int>(kNumClasses);

/// counts(true, predicted).
using ConfusionMatrix = Eigen::Matrix<std::int64_t, kClassesI, kClassesI>;
using CostMatrix = Eigen::Matrix<double, kClassesI, kClassesI>;

/// The KDD-99 contest cost matrix (rows true class, columns prediction).
CostMatrix kdd_cost_matrix();

/// Reads a 5x5 comma-separated matrix.
CostMatrix load_cost_matrix(const std::filesystem::path& path);

ConfusionMatrix confusion(std::span<const FlowClass> truth, std::span<const FlowClass> predictions);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    std::int64_t support = 0;
};

struct MetricsReport {
    std::array<ClassMetrics, kNumClasses> per_class{};
    double precision = 0.0; // support-weighted averages
    double recall = 0.0;
    double f_score = 0.0;
    double accuracy = 0.0;
    double false_alarm = 0.0; // share of true Normal samples flagged as an attack
    double cost = 0.0;        // mean misclassification cost per sample
    std::int64_t total = 0;
};

MetricsReport report(const ConfusionMatrix& cm, const CostMatrix& cost);

} // namespace flowgate
