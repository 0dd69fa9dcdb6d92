#include "shardsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace shardsim {

namespace {

constexpr int kRandomRetryCap = 64;

std::vector<std::vector<ShardId>> empty_adjacency(int s) {
    return std::vector<std::vector<ShardId>>(static_cast<std::size_t>(s));
}

void add_edge(std::vector<std::vector<ShardId>>& adj, ShardId a, ShardId b) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
}

std::vector<int> bfs(const std::vector<std::vector<ShardId>>& adj, ShardId src) {
    std::vector<int> d(adj.size(), -1);
    std::deque<ShardId> q;
    d[static_cast<std::size_t>(src)] = 0;
    q.push_back(src);
    while (!q.empty()) {
        ShardId u = q.front();
        q.pop_front();
        for (ShardId v : adj[static_cast<std::size_t>(u)]) {
            if (d[static_cast<std::size_t>(v)] < 0) {
                d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(u)] + 1;
                q.push_back(v);
            }
        }
    }
    return d;
}

std::vector<std::vector<ShardId>> random_adjacency(int s, std::uint64_t seed, double edge_prob) {
    std::mt19937_64 rng(seed);
    auto adj = empty_adjacency(s);
    // Draw each potential edge with a fixed probability; 64-bit threshold
    // comparison keeps the draw portable across standard libraries.
    auto threshold = static_cast<std::uint64_t>(
        edge_prob * static_cast<double>(std::numeric_limits<std::uint64_t>::max()));
    for (ShardId a = 0; a < s; ++a) {
        for (ShardId b = a + 1; b < s; ++b) {
            if (rng() <= threshold) add_edge(adj, a, b);
        }
    }
    return adj;
}

}  // namespace

TopologyKind parse_topology_kind(const std::string& name) {
    if (name == "clique") return TopologyKind::Clique;
    if (name == "line") return TopologyKind::Line;
    if (name == "ring") return TopologyKind::Ring;
    if (name == "grid") return TopologyKind::Grid;
    if (name == "random-connected") return TopologyKind::RandomConnected;
    throw TopologyError("unknown topology kind: " + name);
}

std::string to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::Clique: return "clique";
        case TopologyKind::Line: return "line";
        case TopologyKind::Ring: return "ring";
        case TopologyKind::Grid: return "grid";
        case TopologyKind::RandomConnected: return "random-connected";
    }
    return "?";
}

bool ShardGraph::has_edge(ShardId a, ShardId b) const {
    const auto& n = adjacency[static_cast<std::size_t>(a)];
    return std::find(n.begin(), n.end(), b) != n.end();
}

ShardGraph build_graph(const TopologySpec& spec) {
    const int s = spec.shard_count;
    if (s < 1) throw TopologyError("shard_count must be >= 1");

    std::vector<std::vector<ShardId>> adj;
    switch (spec.kind) {
        case TopologyKind::Clique:
            adj = empty_adjacency(s);
            for (ShardId a = 0; a < s; ++a)
                for (ShardId b = a + 1; b < s; ++b) add_edge(adj, a, b);
            break;
        case TopologyKind::Line:
            adj = empty_adjacency(s);
            for (ShardId a = 0; a + 1 < s; ++a) add_edge(adj, a, a + 1);
            break;
        case TopologyKind::Ring:
            adj = empty_adjacency(s);
            for (ShardId a = 0; a + 1 < s; ++a) add_edge(adj, a, a + 1);
            if (s > 2) add_edge(adj, s - 1, 0);
            break;
        case TopologyKind::Grid: {
            const int rows = spec.grid_rows;
            const int cols = spec.grid_cols;
            if (rows < 1 || cols < 1 || rows * cols != s)
                throw TopologyError("grid sides must multiply to shard_count");
            adj = empty_adjacency(s);
            auto at = [cols](int r, int c) { return r * cols + c; };
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    if (c + 1 < cols) add_edge(adj, at(r, c), at(r, c + 1));
                    if (r + 1 < rows) add_edge(adj, at(r, c), at(r + 1, c));
                }
            }
            break;
        }
        case TopologyKind::RandomConnected: {
            double p = spec.edge_prob;
            if (p < 0) {
                // Above the sharp connectivity threshold ln(s)/s with margin.
                p = s == 1 ? 1.0 : std::min(1.0, (std::log(static_cast<double>(s)) + 2.0) /
                                                     static_cast<double>(s));
            }
            bool connected = false;
            for (int attempt = 0; attempt < kRandomRetryCap && !connected; ++attempt) {
                adj = random_adjacency(s, spec.seed + static_cast<std::uint64_t>(attempt), p);
                auto d = bfs(adj, 0);
                connected = std::find(d.begin(), d.end(), -1) == d.end();
            }
            if (!connected)
                throw TopologyError("random draw stayed disconnected after " +
                                    std::to_string(kRandomRetryCap) + " sub-seeds");
            break;
        }
    }

    ShardGraph g;
    g.shard_count = s;
    for (auto& n : adj) std::sort(n.begin(), n.end());
    g.adjacency = std::move(adj);
    g.dist.reserve(static_cast<std::size_t>(s));
    int diameter = 0;
    for (ShardId src = 0; src < s; ++src) {
        auto d = bfs(g.adjacency, src);
        for (int v : d) {
            if (v < 0) throw TopologyError("graph is disconnected");
            diameter = std::max(diameter, v);
        }
        g.dist.push_back(std::move(d));
    }
    g.diameter = diameter;
    return g;
}

int distance(const ShardGraph& g, ShardId a, ShardId b) {
    if (a < 0 || a >= g.shard_count || b < 0 || b >= g.shard_count)
        throw std::out_of_range("shard id out of range");
    return g.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
}

}  // namespace shardsim
