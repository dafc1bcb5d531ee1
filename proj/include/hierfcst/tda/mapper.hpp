#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst::tda {

struct MapperParams {
    int intervals = 10;
    double overlap = 0.3;
    //! Bins of the merge-height histogram whose first empty bin sets the cut.
    int histogram_bins = 10;

    void validate() const;
};

struct MapperNode {
    int interval = 0;
    std::vector<std::size_t> members; //!< sorted row indices
    std::string label;                //!< majority best-model label, empty if unlabeled
    double purity = 0.0;
};

struct MapperGraph {
    std::size_t n_points = 0;
    std::vector<MapperNode> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges; //!< (a, b) with a < b, sorted
    //! Final cluster id per node once partitioned; empty before.
    std::vector<int> partition;

    //! Connected component id per node, numbered by smallest node index.
    std::vector<int> components() const;
    std::vector<std::vector<std::size_t>> adjacency() const;
};

//! Lens interval bounds. A zero-width lens range yields a single interval.
std::vector<std::pair<double, double>> cover_intervals(double lo, double hi, int intervals,
                                                       double overlap);

//! Single-linkage clusters of the given rows under Canberra distance, cut at
//! the first empty bin of the merge-height histogram. Clusters are sorted by
//! smallest member.
std::vector<std::vector<std::size_t>> single_linkage_first_gap(const Eigen::MatrixXd& features,
                                                               const std::vector<std::size_t>& rows,
                                                               int bins);

//! Mapper graph over feature rows with a scalar lens. Nodes are ordered by
//! (interval, smallest member); two nodes are joined iff they share a member.
MapperGraph mapper(const Eigen::MatrixXd& features, const Eigen::VectorXd& lens,
                   const MapperParams& params = {});

//! Majority label (ties to the lexicographically smallest) and purity per node.
void label_nodes(MapperGraph& graph, const std::vector<std::string>& point_labels);

} // namespace hierfcst::tda
