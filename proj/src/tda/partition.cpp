#include <hierfcst/tda/partition.hpp>

#include <hierfcst/error.hpp>
#include <hierfcst/rng.hpp>

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace hierfcst::tda {
namespace {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

// Edges of the subgraph induced by `nodes`, relabelled to local indices.
EdgeList induced_edges(const EdgeList& edges, const std::vector<std::size_t>& nodes) {
    std::map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        local[nodes[i]] = i;
    }
    EdgeList out;
    for (const auto& [a, b] : edges) {
        const auto ia = local.find(a);
        const auto ib = local.find(b);
        if (ia != local.end() && ib != local.end()) {
            out.emplace_back(ia->second, ib->second);
        }
    }
    return out;
}

std::vector<std::vector<std::size_t>> connected_parts(const EdgeList& edges,
                                                      const std::vector<std::size_t>& nodes) {
    const auto local = induced_edges(edges, nodes);
    std::vector<std::vector<std::size_t>> adj(nodes.size());
    for (const auto& [a, b] : local) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> seen(nodes.size(), 0);
    std::vector<std::vector<std::size_t>> parts;
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        if (seen[s]) {
            continue;
        }
        std::vector<std::size_t> part;
        std::vector<std::size_t> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            part.push_back(nodes[u]);
            for (const auto v : adj[u]) {
                if (!seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        std::sort(part.begin(), part.end());
        parts.push_back(std::move(part));
    }
    return parts;
}

std::size_t distinct_points(const MapperGraph& graph, const std::vector<std::size_t>& nodes) {
    std::set<std::size_t> points;
    for (const auto n : nodes) {
        points.insert(graph.nodes[n].members.begin(), graph.nodes[n].members.end());
    }
    return points.size();
}

void split(const MapperGraph& graph, const std::vector<std::size_t>& part, std::size_t min_size,
           std::vector<std::vector<std::size_t>>& leaves) {
    if (part.size() < 2) {
        leaves.push_back(part);
        return;
    }
    auto [first, second] = fiedler_bisect(part.size(), induced_edges(graph.edges, part));
    for (auto& n : first) {
        n = part[n];
    }
    for (auto& n : second) {
        n = part[n];
    }
    if (first.empty() || second.empty() || distinct_points(graph, first) < min_size ||
        distinct_points(graph, second) < min_size) {
        leaves.push_back(part);
        return;
    }
    for (const auto* side : {&first, &second}) {
        for (const auto& sub : connected_parts(graph.edges, *side)) {
            split(graph, sub, min_size, leaves);
        }
    }
}

} // namespace

Eigen::MatrixXd laplacian(std::size_t n_nodes, const EdgeList& edges) {
    const auto n = static_cast<Eigen::Index>(n_nodes);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [a, b] : edges) {
        if (a >= n_nodes || b >= n_nodes) {
            throw RangeError("edge refers to a missing node");
        }
        if (a == b) {
            continue;
        }
        const auto i = static_cast<Eigen::Index>(a);
        const auto j = static_cast<Eigen::Index>(b);
        L(i, j) -= 1.0;
        L(j, i) -= 1.0;
        L(i, i) += 1.0;
        L(j, j) += 1.0;
    }
    return L;
}

Eigen::VectorXd fiedler_vector(const Eigen::MatrixXd& L) {
    const auto n = L.rows();
    if (n < 2) {
        throw RangeError("Fiedler vector needs at least 2 nodes");
    }
    const double c = 2.0 * L.diagonal().maxCoeff() + 1.0;
    const Eigen::SparseMatrix<double> S = L.sparseView();

    // A fixed pseudo-random start; a structured one can be orthogonal to the
    // Fiedler direction on symmetric graphs.
    Rng rng(0x5eed);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = rng.normal();
    }
    v.array() -= v.mean();
    v.normalize();
    constexpr int max_iterations = 200000;
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd w = c * v - S * v;
        w.array() -= w.mean();
        const double mu = v.dot(w);
        const double residual = (w - mu * v).norm();
        v = w / w.norm();
        if (residual <= 1e-13 * c) {
            break;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) > 0.0) {
                v = -v;
            }
            break;
        }
    }
    return v;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fiedler_bisect(std::size_t n_nodes,
                                                                             const EdgeList& edges) {
    const auto v = fiedler_vector(laplacian(n_nodes, edges));
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        (v(static_cast<Eigen::Index>(i)) >= 0.0 ? out.second : out.first).push_back(i);
    }
    return out;
}

std::vector<int> fiedler_partition(const MapperGraph& graph, std::size_t min_cluster_size) {
    std::vector<std::size_t> all(graph.nodes.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    std::vector<std::vector<std::size_t>> leaves;
    for (const auto& part : connected_parts(graph.edges, all)) {
        split(graph, part, std::max<std::size_t>(min_cluster_size, 1), leaves);
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    std::vector<int> id(graph.nodes.size(), -1);
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        for (const auto n : leaves[k]) {
            id[n] = static_cast<int>(k);
        }
    }
    return id;
}

} // namespace hierfcst::tda
