#include "dmvf/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "dmvf/errors.hpp"
#include "dmvf/rng.hpp"

namespace dmvf {

CommGraph CommGraph::from_edges(int n, std::vector<std::pair<int, int>> edge_list) {
    if (n < 1) throw GraphError("graph needs at least one node, got n=" + std::to_string(n));
    CommGraph g;
    g.n = n;
    g.adj.resize(n);
    for (auto& [a, b] : edge_list) {
        if (a == b) throw GraphError("self-loop on node " + std::to_string(a));
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw GraphError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                             ") outside node range [0," + std::to_string(n) + ")");
        if (a > b) std::swap(a, b);
    }
    std::sort(edge_list.begin(), edge_list.end());
    edge_list.erase(std::unique(edge_list.begin(), edge_list.end()), edge_list.end());
    g.edges = std::move(edge_list);
    for (auto [a, b] : g.edges) {
        g.adj[a].push_back(b);
        g.adj[b].push_back(a);
    }
    for (auto& nb : g.adj) std::sort(nb.begin(), nb.end());
    return g;
}

CommGraph CommGraph::complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return from_edges(n, std::move(e));
}

CommGraph CommGraph::path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return from_edges(n, std::move(e));
}

CommGraph CommGraph::ring(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    if (n > 2) e.emplace_back(0, n - 1);
    return from_edges(n, std::move(e));
}

CommGraph CommGraph::star(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 1; i < n; ++i) e.emplace_back(0, i);
    return from_edges(n, std::move(e));
}

bool CommGraph::has_edge(int i, int j) const {
    if (i == j) return false;
    const auto& nb = adj.at(i);
    return std::binary_search(nb.begin(), nb.end(), j);
}

int CommGraph::max_degree() const {
    int d = 0;
    for (const auto& nb : adj) d = std::max<int>(d, static_cast<int>(nb.size()));
    return d;
}

std::vector<int> CommGraph::closed_neighborhood(int i) const {
    std::vector<int> v = adj.at(i);
    v.push_back(i);
    std::sort(v.begin(), v.end());
    return v;
}

namespace {

// BFS hop distances from src; unreachable nodes stay at -1.
std::vector<int> bfs_distances(const CommGraph& g, int src) {
    std::vector<int> dist(g.n, -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : g.adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

}  // namespace

bool CommGraph::connected() const {
    if (n == 0) return false;
    auto dist = bfs_distances(*this, 0);
    return std::all_of(dist.begin(), dist.end(), [](int d) { return d >= 0; });
}

void CommGraph::require_connected() const {
    if (!connected())
        throw GraphError("communication graph is not connected (n=" + std::to_string(n) +
                         ", edges=" + std::to_string(edges.size()) + ")");
}

CommGraph erdos_renyi(int n, double p, std::uint64_t seed) {
    if (n < 2) throw GraphError("erdos_renyi requires n >= 2");
    if (!(p > 0.0) || p > 1.0) throw GraphError("erdos_renyi requires p in (0,1]");
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        auto rng = make_rng(seed, 0x4552ULL + static_cast<std::uint64_t>(attempt));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (unif(rng) < p) e.emplace_back(i, j);
        CommGraph g = CommGraph::from_edges(n, std::move(e));
        if (g.connected()) return g;
    }
    throw GraphError("erdos_renyi: no connected sample after " + std::to_string(kMaxAttempts) +
                     " attempts (p=" + std::to_string(p) + " is too small; increase p)");
}

int diameter(const CommGraph& g) {
    g.require_connected();
    int dia = 0;
    for (int s = 0; s < g.n; ++s) {
        auto dist = bfs_distances(g, s);
        for (int d : dist) dia = std::max(dia, d);
    }
    return dia;
}

}  // namespace dmvf
