#include <hierfcst/tda/selector.hpp>

#include <hierfcst/binary_io.hpp>
#include <hierfcst/error.hpp>
#include <hierfcst/tda/partition.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace hierfcst::tda {
namespace {

std::string majority(const std::map<std::string, std::size_t>& votes, std::size_t* top_count) {
    std::string best;
    std::size_t top = 0;
    for (const auto& [label, count] : votes) {
        if (count > top) {
            top = count;
            best = label;
        }
    }
    if (top_count != nullptr) {
        *top_count = top;
    }
    return best;
}

} // namespace

void SelectorParams::validate() const {
    mapper.validate();
    if (k < 1) {
        throw ConfigError("kNN routing needs k >= 1");
    }
    FeatureSet{features};
}

std::string Selector::route_features(std::span<const double> query) const {
    if (query.size() != features.size()) {
        throw DimensionError("query has " + std::to_string(query.size()) + " features, expected " +
                             std::to_string(features.size()));
    }
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(static_cast<std::size_t>(train_features.rows()));
    for (Eigen::Index i = 0; i < train_features.rows(); ++i) {
        const Eigen::RowVectorXd row = train_features.row(i);
        dist.emplace_back(canberra(query, std::span<const double>(row.data(), query.size())),
                          static_cast<std::size_t>(i));
    }
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    std::map<std::string, std::size_t> votes;
    for (std::size_t j = 0; j < kk; ++j) {
        const auto c = series_cluster[dist[j].second];
        ++votes[clusters[static_cast<std::size_t>(c)].label];
    }
    return majority(votes, nullptr);
}

std::string Selector::route(std::span<const double> series) const {
    const auto f = features.extract(series);
    return route_features(f);
}

SelectionResult fit_selector(const std::vector<std::vector<double>>& series,
                             const std::vector<std::string>& ids,
                             const std::vector<std::string>& best_labels,
                             const SelectorParams& params) {
    params.validate();
    if (series.size() < 2) {
        throw RangeError("model selection needs at least 2 training series");
    }
    if (ids.size() != series.size() || best_labels.size() != series.size()) {
        throw DimensionError("ids and labels must match the training series");
    }
    for (std::size_t i = 0; i < best_labels.size(); ++i) {
        if (best_labels[i].empty()) {
            throw ConfigError("training series '" + ids[i] + "' has no best-model label");
        }
    }

    SelectionResult result;
    auto& sel = result.selector;
    sel.features = FeatureSet(params.features);
    sel.k = params.k;
    sel.train_features = sel.features.matrix(series);
    sel.train_ids = ids;
    sel.best_labels = best_labels;

    result.lens = pca_lens(sel.train_features);
    result.graph = mapper(sel.train_features, result.lens.projection, params.mapper);
    label_nodes(result.graph, best_labels);
    const auto min_size =
        params.min_cluster_size > 0
            ? params.min_cluster_size
            : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * series.size())));
    result.graph.partition = fiedler_partition(result.graph, min_size);

    const int n_clusters =
        *std::max_element(result.graph.partition.begin(), result.graph.partition.end()) + 1;
    std::vector<std::vector<int>> node_counts(series.size(),
                                              std::vector<int>(static_cast<std::size_t>(n_clusters)));
    for (std::size_t n = 0; n < result.graph.nodes.size(); ++n) {
        for (const auto m : result.graph.nodes[n].members) {
            ++node_counts[m][static_cast<std::size_t>(result.graph.partition[n])];
        }
    }
    sel.clusters.assign(static_cast<std::size_t>(n_clusters), {});
    sel.series_cluster.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& counts = node_counts[i];
        const auto c = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) -
                                                counts.begin());
        sel.series_cluster[i] = static_cast<int>(c);
        sel.clusters[c].series.push_back(i);
    }
    for (auto& cluster : sel.clusters) {
        std::map<std::string, std::size_t> votes;
        for (const auto i : cluster.series) {
            ++votes[best_labels[i]];
        }
        std::size_t top = 0;
        cluster.label = majority(votes, &top);
        cluster.purity = cluster.series.empty()
                             ? 0.0
                             : static_cast<double>(top) / static_cast<double>(cluster.series.size());
        cluster.share = static_cast<double>(cluster.series.size()) / static_cast<double>(series.size());
    }
    // A cluster can end up without series when all its nodes' members are
    // claimed elsewhere; it never receives votes then.
    return result;
}

void save_selector(const std::filesystem::path& path, const Selector& s) {
    BinaryWriter w;
    w.u64(s.features.size());
    for (const auto& name : s.features.names()) {
        w.str(name);
    }
    w.u32(static_cast<std::uint32_t>(s.k));
    w.matrix(s.train_features);
    w.u64(s.train_ids.size());
    for (std::size_t i = 0; i < s.train_ids.size(); ++i) {
        w.str(s.train_ids[i]);
        w.str(s.best_labels[i]);
        w.u32(static_cast<std::uint32_t>(s.series_cluster[i]));
    }
    w.u64(s.clusters.size());
    for (const auto& c : s.clusters) {
        w.u64(c.series.size());
        for (const auto i : c.series) {
            w.u64(i);
        }
        w.str(c.label);
        w.f64(c.purity);
        w.f64(c.share);
    }
    write_container(path, ContainerKind::selector, w);
}

Selector load_selector(const std::filesystem::path& path) {
    auto r = read_container(path, ContainerKind::selector);
    Selector s;
    std::vector<std::string> names(r.u64());
    for (auto& name : names) {
        name = r.str();
    }
    s.features = FeatureSet(std::move(names));
    s.k = static_cast<int>(r.u32());
    s.train_features = r.matrix();
    const auto n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        s.train_ids.push_back(r.str());
        s.best_labels.push_back(r.str());
        s.series_cluster.push_back(static_cast<int>(r.u32()));
    }
    s.clusters.resize(r.u64());
    for (auto& c : s.clusters) {
        c.series.resize(r.u64());
        for (auto& i : c.series) {
            i = r.u64();
        }
        c.label = r.str();
        c.purity = r.f64();
        c.share = r.f64();
    }
    if (!r.done() || static_cast<std::uint64_t>(s.train_features.rows()) != n) {
        throw FormatError("selector file is inconsistent");
    }
    for (const auto c : s.series_cluster) {
        if (c < 0 || static_cast<std::size_t>(c) >= s.clusters.size()) {
            throw FormatError("selector file refers to a missing cluster");
        }
    }
    return s;
}

void write_graph_json(std::ostream& out, const MapperGraph& graph,
                      const std::vector<std::string>& ids) {
    nlohmann::json doc;
    doc["points"] = graph.n_points;
    auto& nodes = doc["nodes"] = nlohmann::json::array();
    for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
        const auto& node = graph.nodes[n];
        nlohmann::json members = nlohmann::json::array();
        for (const auto m : node.members) {
            members.push_back(m < ids.size() ? ids[m] : std::to_string(m));
        }
        nodes.push_back({{"id", n},
                         {"interval", node.interval},
                         {"members", std::move(members)},
                         {"label", node.label},
                         {"purity", node.purity},
                         {"cluster", graph.partition.empty() ? -1 : graph.partition[n]}});
    }
    auto& edges = doc["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : graph.edges) {
        edges.push_back({a, b});
    }
    out << doc.dump(2) << '\n';
}

void write_graph_dot(std::ostream& out, const MapperGraph& graph) {
    out << "graph mapper {\n";
    for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
        const auto& node = graph.nodes[n];
        out << "  n" << n << " [label=\"" << (node.label.empty() ? "?" : node.label) << " ("
            << node.members.size() << ")\"";
        if (!graph.partition.empty()) {
            out << ", cluster=" << graph.partition[n];
        }
        out << "];\n";
    }
    for (const auto& [a, b] : graph.edges) {
        out << "  n" << a << " -- n" << b << ";\n";
    }
    out << "}\n";
}

void write_cluster_csv(std::ostream& out, const Selector& selector) {
    out << "cluster,label,purity,series,share\n";
    for (std::size_t c = 0; c < selector.clusters.size(); ++c) {
        const auto& cl = selector.clusters[c];
        out << c << ',' << cl.label << ',' << cl.purity << ',' << cl.series.size() << ','
            << cl.share << '\n';
    }
}

} // namespace hierfcst::tda
