#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "grouptree/return_panel.hpp"

namespace grouptree {

/// One analysis window: `length` consecutive return samples starting at
/// `start`, part of a schedule advancing by `step` samples.
struct WindowSpec {
    std::size_t start = 0;
    std::size_t length = 0;
    std::size_t step = 0;

    std::size_t end() const noexcept { return start + length; }  // one past last sample
};

/// Window starts 0, step, 2*step, ... while start + length <= total_length.
/// Throws ConfigError for invalid parameters, DataError when no window fits.
std::vector<WindowSpec> rolling_windows(std::size_t total_length, std::size_t length,
                                        std::size_t step);

/// Pairwise return correlations over one window. Exactly symmetric with a
/// unit diagonal; stocks with zero variance in the window are marked
/// unusable and carry NaN off-diagonals.
struct CorrelationMatrix {
    std::vector<std::string> tickers;
    Eigen::MatrixXd rho;               // N x N
    std::vector<std::uint8_t> usable;  // per stock

    std::size_t usable_count() const;
};

CorrelationMatrix correlation_matrix(const ReturnPanel& panel, const WindowSpec& window);

/// Correlation of two equally long samples; NaN when either sample is
/// exactly constant. Two-pass centered evaluation.
double pearson(const double* x, const double* y, std::size_t n);

enum class TreeWeight {
    correlation,  ///< maximize total rho (link weight is the coefficient itself)
    distance,     ///< minimize total sqrt(2(1-rho)); identical edge set
};

struct TreeEdge {
    std::uint32_t a = 0, b = 0;  // indices into SpanningTree::nodes, a < b
    double rho = 0.0;
};

/// Connected, loop-free asset graph: N nodes, N-1 links keeping the most
/// important correlations.
struct SpanningTree {
    std::vector<std::string> nodes;
    std::vector<TreeEdge> edges;

    double total_weight() const;
    void validate() const;
};

/// Kruskal over the usable nodes; ties broken by ascending lexicographic
/// ticker pair so the edge set is reproducible.
/// Throws DataError when fewer than 2 nodes are usable.
SpanningTree asset_tree(const CorrelationMatrix& corr,
                        TreeWeight mode = TreeWeight::correlation);

}  // namespace grouptree
