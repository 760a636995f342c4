#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dmvf {

/// Undirected communication topology over n agents. Edges are stored as
/// (i, j) with i < j; adjacency lists are kept sorted so that every
/// traversal order is deterministic.
struct CommGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adj;

    static CommGraph from_edges(int n, std::vector<std::pair<int, int>> edge_list);
    static CommGraph complete(int n);
    static CommGraph path(int n);
    static CommGraph ring(int n);
    static CommGraph star(int n);

    bool has_edge(int i, int j) const;
    int degree(int i) const { return static_cast<int>(adj.at(i).size()); }
    int max_degree() const;
    int edge_count() const { return static_cast<int>(edges.size()); }

    /// Neighbors of i plus i itself, ascending. This is the neighborhood the
    /// scoring and update rules average over.
    std::vector<int> closed_neighborhood(int i) const;

    bool connected() const;
    void require_connected() const;  // throws GraphError
};

/// Samples each of the C(n,2) edges independently with probability p and
/// resamples (fresh substream) until the graph comes out connected.
CommGraph erdos_renyi(int n, double p, std::uint64_t seed);

/// Max over node pairs of the BFS hop distance. Throws on disconnected input.
int diameter(const CommGraph& g);

}  // namespace dmvf
