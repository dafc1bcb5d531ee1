#include <hierfcst/tda/mapper.hpp>

#include <hierfcst/error.hpp>
#include <hierfcst/tda/features.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace hierfcst::tda {
namespace {

struct UnionFind {
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void join(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }

    std::vector<std::size_t> parent;
};

} // namespace

void MapperParams::validate() const {
    if (intervals < 1) {
        throw ConfigError("mapper needs at least one interval");
    }
    if (!(overlap > 0.0 && overlap <= 0.5)) {
        throw ConfigError("mapper overlap must lie in (0, 0.5]");
    }
    if (histogram_bins < 2) {
        throw ConfigError("mapper histogram needs at least 2 bins");
    }
}

std::vector<int> MapperGraph::components() const {
    UnionFind uf(nodes.size());
    for (const auto& [a, b] : edges) {
        uf.join(a, b);
    }
    std::vector<int> id(nodes.size(), -1);
    std::map<std::size_t, int> root_id;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto root = uf.find(i);
        const auto [it, inserted] = root_id.emplace(root, static_cast<int>(root_id.size()));
        id[i] = it->second;
    }
    return id;
}

std::vector<std::vector<std::size_t>> MapperGraph::adjacency() const {
    std::vector<std::vector<std::size_t>> adj(nodes.size());
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

std::vector<std::pair<double, double>> cover_intervals(double lo, double hi, int intervals,
                                                       double overlap) {
    if (!(hi > lo) || intervals == 1) {
        return {{lo, hi}};
    }
    const double n = intervals;
    const double length = (hi - lo) / (n - (n - 1.0) * overlap);
    const double step = length * (1.0 - overlap);
    std::vector<std::pair<double, double>> out;
    for (int k = 0; k < intervals; ++k) {
        const double start = lo + k * step;
        out.emplace_back(start, k + 1 == intervals ? hi : start + length);
    }
    return out;
}

std::vector<std::vector<std::size_t>> single_linkage_first_gap(const Eigen::MatrixXd& features,
                                                               const std::vector<std::size_t>& rows,
                                                               int bins) {
    const std::size_t n = rows.size();
    if (n <= 1) {
        return n == 0 ? std::vector<std::vector<std::size_t>>{}
                      : std::vector<std::vector<std::size_t>>{rows};
    }
    // Prim's algorithm on the dense distance graph; the MST edges are the
    // single-linkage merges.
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(n, 0);
    std::vector<bool> in_tree(n, false);
    std::vector<std::tuple<double, std::size_t, std::size_t>> merges;
    best[0] = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t next = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_tree[i] && (next == n || best[i] < best[next])) {
                next = i;
            }
        }
        in_tree[next] = true;
        if (step > 0) {
            merges.emplace_back(best[next], from[next], next);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_tree[i]) {
                const double d = canberra(features.row(static_cast<Eigen::Index>(rows[next])),
                                          features.row(static_cast<Eigen::Index>(rows[i])));
                if (d < best[i]) {
                    best[i] = d;
                    from[i] = next;
                }
            }
        }
    }

    double top = 0.0;
    for (const auto& m : merges) {
        top = std::max(top, std::get<0>(m));
    }
    double cut = std::numeric_limits<double>::infinity();
    if (top > 0.0) {
        std::vector<int> counts(static_cast<std::size_t>(bins), 0);
        const double width = top / bins;
        for (const auto& m : merges) {
            const auto b = std::min(bins - 1, static_cast<int>(std::get<0>(m) / width));
            ++counts[static_cast<std::size_t>(b)];
        }
        for (int b = 0; b < bins; ++b) {
            if (counts[static_cast<std::size_t>(b)] == 0) {
                cut = b * width;
                break;
            }
        }
    }

    UnionFind uf(n);
    for (const auto& [height, a, b] : merges) {
        if (height < cut) {
            uf.join(a, b);
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        groups[uf.find(i)].push_back(rows[i]);
    }
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, members] : groups) {
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

MapperGraph mapper(const Eigen::MatrixXd& features, const Eigen::VectorXd& lens,
                   const MapperParams& params) {
    params.validate();
    if (features.rows() == 0) {
        throw RangeError("mapper needs at least one point");
    }
    if (lens.size() != features.rows()) {
        throw DimensionError("lens needs one value per feature row");
    }
    MapperGraph graph;
    graph.n_points = static_cast<std::size_t>(features.rows());
    const double lo = lens.minCoeff();
    const double hi = lens.maxCoeff();
    const auto cover = cover_intervals(lo, hi, params.intervals, params.overlap);
    for (std::size_t k = 0; k < cover.size(); ++k) {
        const auto [start, end] = cover[k];
        std::vector<std::size_t> rows;
        for (Eigen::Index i = 0; i < lens.size(); ++i) {
            if (lens(i) >= start && lens(i) <= end) {
                rows.push_back(static_cast<std::size_t>(i));
            }
        }
        for (auto& members : single_linkage_first_gap(features, rows, params.histogram_bins)) {
            graph.nodes.push_back({static_cast<int>(k), std::move(members), {}, 0.0});
        }
    }
    for (std::size_t a = 0; a < graph.nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < graph.nodes.size(); ++b) {
            const auto& ma = graph.nodes[a].members;
            const auto& mb = graph.nodes[b].members;
            std::size_t i = 0;
            std::size_t j = 0;
            bool shared = false;
            while (i < ma.size() && j < mb.size() && !shared) {
                if (ma[i] == mb[j]) {
                    shared = true;
                } else if (ma[i] < mb[j]) {
                    ++i;
                } else {
                    ++j;
                }
            }
            if (shared) {
                graph.edges.emplace_back(a, b);
            }
        }
    }
    return graph;
}

void label_nodes(MapperGraph& graph, const std::vector<std::string>& point_labels) {
    if (point_labels.size() != graph.n_points) {
        throw DimensionError("one label per mapper point is required");
    }
    for (auto& node : graph.nodes) {
        std::map<std::string, std::size_t> votes;
        for (const auto m : node.members) {
            ++votes[point_labels[m]];
        }
        std::size_t top = 0;
        for (const auto& [label, count] : votes) {
            if (count > top) {
                top = count;
                node.label = label;
            }
        }
        node.purity = static_cast<double>(top) / static_cast<double>(node.members.size());
    }
}

} // namespace hierfcst::tda
