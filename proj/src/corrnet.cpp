#include "grouptree/corrnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "grouptree/errors.hpp"

namespace grouptree {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct UnionFind {
    std::vector<std::uint32_t> parent;
    std::vector<std::uint32_t> size;

    explicit UnionFind(std::size_t n) : parent(n), size(n, 1) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        return true;
    }
};
}  // namespace

std::vector<WindowSpec> rolling_windows(std::size_t total_length, std::size_t length,
                                        std::size_t step) {
    if (length < 2) throw ConfigError("window length must be at least 2");
    if (step < 1) throw ConfigError("window step must be at least 1");
    if (total_length < length) {
        throw DataError("window schedule is empty: " + std::to_string(total_length) +
                        " samples available, window needs " + std::to_string(length));
    }
    std::vector<WindowSpec> out;
    for (std::size_t start = 0; start + length <= total_length; start += step) {
        out.push_back({start, length, step});
    }
    return out;
}

double pearson(const double* x, const double* y, std::size_t n) {
    // Exact-constancy test first: the mean of a constant sample can carry
    // rounding, which would turn zero variance into numerical dust.
    const auto [xmin, xmax] = std::minmax_element(x, x + n);
    const auto [ymin, ymax] = std::minmax_element(y, y + n);
    if (*xmin == *xmax || *ymin == *ymax) return kNan;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return kNan;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::size_t CorrelationMatrix::usable_count() const {
    std::size_t n = 0;
    for (auto u : usable) n += u != 0;
    return n;
}

CorrelationMatrix correlation_matrix(const ReturnPanel& panel, const WindowSpec& window) {
    const Eigen::Index n = panel.returns.rows();
    if (window.length < 2 || window.end() > static_cast<std::size_t>(panel.returns.cols())) {
        throw DataError("window [" + std::to_string(window.start) + ", " +
                        std::to_string(window.end()) + ") does not fit the panel");
    }
    const Eigen::Index t0 = static_cast<Eigen::Index>(window.start);
    const Eigen::Index len = static_cast<Eigen::Index>(window.length);

    CorrelationMatrix out;
    out.tickers = panel.tickers;
    out.usable.assign(static_cast<std::size_t>(n), 1);

    Eigen::MatrixXd centered = panel.returns.middleCols(t0, len);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto row = centered.row(i);
        if (row.minCoeff() == row.maxCoeff()) {
            out.usable[static_cast<std::size_t>(i)] = 0;
            row.setZero();
        } else {
            row.array() -= row.mean();
        }
    }

    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n, n);
    cross.selfadjointView<Eigen::Lower>().rankUpdate(centered);

    out.rho.resize(n, n);
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ss = cross(i, i);
        if (ss == 0.0) out.usable[static_cast<std::size_t>(i)] = 0;
        scale(i) = out.usable[static_cast<std::size_t>(i)] ? 1.0 / std::sqrt(ss) : 0.0;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        out.rho(j, j) = 1.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double r;
            if (out.usable[static_cast<std::size_t>(i)] && out.usable[static_cast<std::size_t>(j)]) {
                r = std::clamp(cross(i, j) * scale(i) * scale(j), -1.0, 1.0);
            } else {
                r = kNan;
            }
            out.rho(i, j) = r;
            out.rho(j, i) = r;
        }
    }
    return out;
}

double SpanningTree::total_weight() const {
    double w = 0.0;
    for (const TreeEdge& e : edges) w += e.rho;
    return w;
}

void SpanningTree::validate() const {
    if (nodes.size() < 2) throw DataError("spanning tree needs at least 2 nodes");
    if (edges.size() != nodes.size() - 1) {
        throw DataError("spanning tree must have exactly N-1 edges");
    }
    UnionFind uf(nodes.size());
    for (const TreeEdge& e : edges) {
        if (e.a >= nodes.size() || e.b >= nodes.size() || e.a == e.b) {
            throw DataError("spanning tree edge references an invalid node");
        }
        if (!uf.unite(e.a, e.b)) throw DataError("spanning tree contains a cycle");
    }
}

SpanningTree asset_tree(const CorrelationMatrix& corr, TreeWeight mode) {
    std::vector<std::uint32_t> nodes;  // indices into corr.tickers
    for (std::size_t i = 0; i < corr.usable.size(); ++i) {
        if (corr.usable[i]) nodes.push_back(static_cast<std::uint32_t>(i));
    }
    const std::size_t n = nodes.size();
    if (n < 2) throw DataError("asset tree needs at least 2 usable stocks");

    SpanningTree tree;
    tree.nodes.reserve(n);
    for (auto i : nodes) tree.nodes.push_back(corr.tickers[i]);

    // Rank nodes by ticker so tie-breaking is lexicographic regardless of
    // the panel's ordering.
    std::vector<std::uint32_t> by_name(n);
    std::iota(by_name.begin(), by_name.end(), 0u);
    std::sort(by_name.begin(), by_name.end(), [&](std::uint32_t a, std::uint32_t b) {
        return tree.nodes[a] < tree.nodes[b];
    });
    std::vector<std::uint32_t> rank(n);
    for (std::uint32_t pos = 0; pos < n; ++pos) rank[by_name[pos]] = pos;

    struct Candidate {
        double key;  // descending rho, or ascending distance, kept negated below
        std::uint32_t lo, hi;  // rank order of the ticker pair
        std::uint32_t a, b;    // node indices
        double rho;
    };
    std::vector<Candidate> all;
    all.reserve(n * (n - 1) / 2);
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = a + 1; b < n; ++b) {
            const double rho = corr.rho(static_cast<Eigen::Index>(nodes[a]),
                                        static_cast<Eigen::Index>(nodes[b]));
            const double key = mode == TreeWeight::correlation
                                   ? -rho
                                   : std::sqrt(2.0 * (1.0 - rho));
            const std::uint32_t ra = rank[a], rb = rank[b];
            all.push_back({key, std::min(ra, rb), std::max(ra, rb), a, b, rho});
        }
    }
    std::sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) {
        if (x.key != y.key) return x.key < y.key;
        if (x.lo != y.lo) return x.lo < y.lo;
        return x.hi < y.hi;
    });

    UnionFind uf(n);
    tree.edges.reserve(n - 1);
    for (const Candidate& c : all) {
        if (!uf.unite(c.a, c.b)) continue;
        tree.edges.push_back({std::min(c.a, c.b), std::max(c.a, c.b), c.rho});
        if (tree.edges.size() == n - 1) break;
    }
    std::sort(tree.edges.begin(), tree.edges.end(), [](const TreeEdge& x, const TreeEdge& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    return tree;
}

}  // namespace grouptree
