#pragma once

#include <hierfcst/tda/features.hpp>
#include <hierfcst/tda/mapper.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst::tda {

struct SelectorParams {
    MapperParams mapper;
    //! 0 means 5% of the training series (at least 1).
    std::size_t min_cluster_size = 0;
    int k = 5;
    std::vector<std::string> features = default_feature_names();

    void validate() const;
};

struct Cluster {
    std::vector<std::size_t> series; //!< training series assigned here, sorted
    std::string label;
    double purity = 0.0;
    double share = 0.0; //!< series.size() / training series

    friend bool operator==(const Cluster&, const Cluster&) = default;
};

//! Fitted model selector: kNN over raw training features under Canberra
//! distance, voting with the neighbors' cluster labels.
struct Selector {
    FeatureSet features;
    int k = 5;
    Eigen::MatrixXd train_features;       //!< raw, one row per training series
    std::vector<std::string> train_ids;
    std::vector<std::string> best_labels; //!< per training series
    std::vector<int> series_cluster;      //!< per training series
    std::vector<Cluster> clusters;

    //! Majority cluster label of the k nearest training series; ties go to
    //! the lexicographically smallest label. Distance ties keep the lower
    //! training index.
    std::string route_features(std::span<const double> features) const;
    std::string route(std::span<const double> series) const;

    friend bool operator==(const Selector&, const Selector&) = default;
};

struct SelectionResult {
    PcaLens lens;
    MapperGraph graph;
    Selector selector;
};

//! Features -> PCA lens -> Mapper -> recursive Fiedler partition -> cluster
//! majority labels. Each series goes to the cluster holding most of the nodes
//! it belongs to (ties to the lower cluster id). Throws ConfigError when a
//! label is empty.
SelectionResult fit_selector(const std::vector<std::vector<double>>& series,
                             const std::vector<std::string>& ids,
                             const std::vector<std::string>& best_labels,
                             const SelectorParams& params = {});

void save_selector(const std::filesystem::path& path, const Selector& selector);
Selector load_selector(const std::filesystem::path& path);

//! Nodes with interval, members (as ids), label, purity and cluster; edges.
void write_graph_json(std::ostream& out, const MapperGraph& graph,
                      const std::vector<std::string>& ids);
void write_graph_dot(std::ostream& out, const MapperGraph& graph);

//! cluster,label,purity,series,share
void write_cluster_csv(std::ostream& out, const Selector& selector);

} // namespace hierfcst::tda
