#include "kdl/graph.hpp"

#include <algorithm>
#include <deque>

namespace kdl {

bool DigraphTopology::is_all_to_all() const {
    for (int i = 0; i < n_vertices; ++i)
        if (in_degrees[i] != n_vertices - 1) return false;
    return true;
}

DigraphTopology build_topology(const Eigen::MatrixXi& adjacency) {
    if (adjacency.rows() != adjacency.cols())
        throw NonSquareMatrix("adjacency matrix must be square");
    const int n = static_cast<int>(adjacency.rows());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int v = adjacency(i, j);
            if (v != 0 && v != 1)
                throw Error("adjacency entries must be 0 or 1");
        }
        if (adjacency(i, i) != 0)
            throw SelfLoopPresent("self-loop at vertex " + std::to_string(i));
    }

    DigraphTopology t;
    t.n_vertices = n;
    t.adjacency = adjacency;
    t.neighbor_sets.resize(n);
    t.in_degrees.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (adjacency(i, j) == 1) t.neighbor_sets[i].push_back(j);
        t.in_degrees[i] = static_cast<int>(t.neighbor_sets[i].size());
    }
    return t;
}

DigraphTopology all_to_all_topology(int n) {
    Eigen::MatrixXi a = Eigen::MatrixXi::Ones(n, n);
    a.diagonal().setZero();
    return build_topology(a);
}

DigraphTopology ring_topology(int n) {
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, (i + 1) % n) = 1;
    return build_topology(a);
}

ConnectivityReport analyze_connectivity(const DigraphTopology& topology) {
    const int n = topology.n_vertices;

    // successors in the information-flow direction: u -> v iff chi_vu = 1
    std::vector<std::vector<int>> succ(n);
    for (int v = 0; v < n; ++v)
        for (int u : topology.neighbor_sets[v]) succ[u].push_back(v);

    ConnectivityReport report;
    report.distances.assign(n, std::vector<std::optional<int>>(n));

    for (int s = 0; s < n; ++s) {
        std::vector<int> dist(n, -1);
        std::deque<int> queue{s};
        dist[s] = 0;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v : succ[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (int v = 0; v < n; ++v)
            if (dist[v] >= 0) report.distances[s][v] = dist[v];
    }

    report.strongly_connected = true;
    int depth = 0;
    for (int i = 0; i < n && report.strongly_connected; ++i)
        for (int j = 0; j < n; ++j) {
            if (!report.distances[i][j]) {
                report.strongly_connected = false;
                break;
            }
            depth = std::max(depth, *report.distances[i][j]);
        }
    if (report.strongly_connected) report.depth = depth;
    return report;
}

} // namespace kdl
