#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kdl/errors.hpp"

namespace kdl {

/// Directed interaction network. adjacency(i, j) == 1 means vertex j
/// transmits information to vertex i, so j is in the neighbor set of i.
struct DigraphTopology {
    int n_vertices = 0;
    Eigen::MatrixXi adjacency;
    std::vector<std::vector<int>> neighbor_sets;
    std::vector<int> in_degrees;

    bool is_all_to_all() const;
};

/// Validates a {0,1} adjacency matrix and derives neighbor sets.
DigraphTopology build_topology(const Eigen::MatrixXi& adjacency);

DigraphTopology all_to_all_topology(int n);

/// Unidirectional ring: vertex i listens to vertex i+1 (mod n).
DigraphTopology ring_topology(int n);

/// Shortest-path structure of the information-flow digraph. Distances
/// run along arcs j -> i where adjacency(i, j) == 1; an unreachable
/// pair carries no value.
struct ConnectivityReport {
    bool strongly_connected = false;
    std::vector<std::vector<std::optional<int>>> distances;
    std::optional<int> depth;
};

ConnectivityReport analyze_connectivity(const DigraphTopology& topology);

} // namespace kdl
