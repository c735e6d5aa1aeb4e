#include "flowgate/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "flowgate/error.hpp"

namespace flowgate {

CostMatrix kdd_cost_matrix()
{
    CostMatrix c;
    // predicted:  Normal Probe DoS U2R R2L
    c << 0, 1, 2, 2, 2, // Normal
        1, 0, 2, 2, 2,  // Probe
        2, 1, 0, 2, 2,  // DoS
        3, 2, 2, 0, 2,  // U2R
        4, 2, 2, 2, 0;  // R2L
    return c;
}

CostMatrix load_cost_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open cost matrix " + path.string());
    CostMatrix c;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#')
            continue;
        if (row == kClassesI)
            throw ConfigError(path.string() + ": more than 5 rows");
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            const auto first = cell.find_first_not_of(" \t");
            const auto last = cell.find_last_not_of(" \t");
            if (first == std::string::npos || col == kClassesI)
                throw ConfigError(path.string() + ": row " + std::to_string(row + 1) + " must have 5 values");
            const std::string_view v(cell.data() + first, last - first + 1);
            double x = 0.0;
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc{} || ptr != v.data() + v.size() || x < 0)
                throw ConfigError(path.string() + ": bad cost '" + std::string(v) + "'");
            c(row, col++) = x;
        }
        if (col != kClassesI)
            throw ConfigError(path.string() + ": row " + std::to_string(row + 1) + " must have 5 values");
        ++row;
    }
    if (row != kClassesI)
        throw ConfigError(path.string() + ": expected 5 rows, got " + std::to_string(row));
    return c;
}

ConfusionMatrix confusion(std::span<const FlowClass> truth, std::span<const FlowClass> predictions)
{
    if (truth.size() != predictions.size())
        throw DataError("confusion: " + std::to_string(truth.size()) + " labels vs " +
                        std::to_string(predictions.size()) + " predictions");
    ConfusionMatrix cm = ConfusionMatrix::Zero();
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++cm(static_cast<Eigen::Index>(code(truth[i])), static_cast<Eigen::Index>(code(predictions[i])));
    return cm;
}

MetricsReport report(const ConfusionMatrix& cm, const CostMatrix& cost)
{
    MetricsReport r;
    r.total = cm.sum();
    if (r.total == 0)
        return r;
    const Eigen::Matrix<double, kClassesI, kClassesI> m = cm.cast<double>();
    const double n = static_cast<double>(r.total);

    for (int j = 0; j < kClassesI; ++j) {
        auto& c = r.per_class[static_cast<std::size_t>(j)];
        const double tp = m(j, j);
        const double predicted = m.col(j).sum();
        const double actual = m.row(j).sum();
        c.support = cm.row(j).sum();
        c.precision = predicted > 0 ? tp / predicted : 0.0;
        c.recall = actual > 0 ? tp / actual : 0.0;
        c.f_score = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
        const double share = actual / n;
        r.precision += share * c.precision;
        r.recall += share * c.recall;
        r.f_score += share * c.f_score;
    }
    r.accuracy = m.trace() / n;
    const double normals = m.row(0).sum();
    r.false_alarm = normals > 0 ? (normals - m(0, 0)) / normals : 0.0;
    r.cost = m.cwiseProduct(cost).sum() / n;
    return r;
}

} // namespace flowgate
