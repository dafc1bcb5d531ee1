#pragma once

#include <hierfcst/tda/mapper.hpp>

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst::tda {

//! Unnormalized Laplacian D - A of an undirected graph.
Eigen::MatrixXd laplacian(std::size_t n_nodes,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges);

//! Eigenvector of the second-smallest Laplacian eigenvalue of a connected
//! graph, by power iteration on (c I - L) deflated against the constant
//! vector. Normalized to unit length with a nonpositive first nonzero entry.
Eigen::VectorXd fiedler_vector(const Eigen::MatrixXd& laplacian);

//! Sign split of a connected graph: nodes with a nonnegative Fiedler entry
//! form the second side. Both sides are sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
fiedler_bisect(std::size_t n_nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

//! Recursive partition: connected components are separated first, then each
//! part is bisected while both sides keep at least `min_cluster_size`
//! distinct points. Returns a cluster id per node, numbered by smallest node.
std::vector<int> fiedler_partition(const MapperGraph& graph, std::size_t min_cluster_size);

} // namespace hierfcst::tda
