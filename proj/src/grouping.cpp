#include "grouptree/grouping.hpp"

#include <limits>

#include "grouptree/errors.hpp"

namespace grouptree {

double grouping_coefficient(const SpanningTree& tree, const CategoryMap& categories) {
    if (tree.edges.empty()) throw DataError("grouping coefficient needs a tree with edges");
    std::vector<const std::string*> label(tree.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        label[i] = &categories.category_of(tree.nodes[i]);
    }
    std::size_t same = 0;
    for (const TreeEdge& e : tree.edges) {
        if (*label[e.a] == *label[e.b]) ++same;
    }
    return static_cast<double>(same) / static_cast<double>(tree.edges.size());
}

GroupingSeries grouping_series(const std::vector<SpanningTree>& trees,
                               const CategoryMap& categories,
                               const std::vector<std::string>& window_start_dates) {
    if (trees.empty()) throw DataError("grouping series needs at least one tree");
    if (window_start_dates.size() != trees.size()) {
        throw DataError("grouping series needs one window start date per tree");
    }
    GroupingSeries out;
    out.window_starts = window_start_dates;
    out.values.reserve(trees.size());
    for (const SpanningTree& tree : trees) {
        out.values.push_back(grouping_coefficient(tree, categories));
    }
    out.relative_values.resize(trees.size());
    const double base = out.values.front();
    if (base > 0.0) {
        for (std::size_t w = 0; w < out.values.size(); ++w) {
            out.relative_values[w] = out.values[w] / base;
        }
    } else {
        warn("grouping series: first window has G = 0, relative series is undefined");
        for (double& v : out.relative_values) v = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

std::map<std::string, CategoryBreakdown> per_category_breakdown(const SpanningTree& tree,
                                                                const CategoryMap& categories) {
    std::map<std::string, CategoryBreakdown> out;
    std::vector<const std::string*> label(tree.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        label[i] = &categories.category_of(tree.nodes[i]);
        ++out[*label[i]].node_count;
    }
    for (const TreeEdge& e : tree.edges) {
        if (*label[e.a] == *label[e.b]) ++out[*label[e.a]].same_category_edges;
    }
    return out;
}

}  // namespace grouptree
