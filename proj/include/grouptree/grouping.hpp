#pragma once

#include <map>
#include <string>
#include <vector>

#include "grouptree/corrnet.hpp"
#include "grouptree/ingest.hpp"

namespace grouptree {

/// Fraction of tree links joining two companies of the same industry
/// category. Throws DataError naming any tree node without a category.
double grouping_coefficient(const SpanningTree& tree, const CategoryMap& categories);

/// Per-window grouping coefficients plus the series rescaled by the first
/// window's value. When the first value is 0 the relative series is
/// undefined (NaN) while the absolute series is still emitted.
struct GroupingSeries {
    std::vector<std::string> window_starts;
    std::vector<double> values;
    std::vector<double> relative_values;
};

GroupingSeries grouping_series(const std::vector<SpanningTree>& trees,
                               const CategoryMap& categories,
                               const std::vector<std::string>& window_start_dates);

struct CategoryBreakdown {
    std::size_t same_category_edges = 0;
    std::size_t node_count = 0;
};

/// Same-category edge and node counts per category; edge counts sum to the
/// numerator of the grouping coefficient.
std::map<std::string, CategoryBreakdown> per_category_breakdown(const SpanningTree& tree,
                                                                const CategoryMap& categories);

}  // namespace grouptree
