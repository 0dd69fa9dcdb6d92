#include "shardsim/conflict.hpp"

#include <algorithm>

namespace shardsim {

bool conflicts(const Transaction& t1, const Transaction& t2) {
    for (const auto& [shard, accs1] : t1.accesses) {
        auto it = t2.accesses.find(shard);
        if (it == t2.accesses.end()) continue;
        for (const auto& a1 : accs1) {
            for (const auto& a2 : it->second) {
                if (a1.account != a2.account) continue;
                if (a1.mode == AccessMode::Write || a2.mode == AccessMode::Write) return true;
            }
        }
    }
    return false;
}

std::size_t ConflictGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& n : neighbors) twice += n.size();
    return twice / 2;
}

int ConflictGraph::max_degree() const {
    std::size_t deg = 0;
    for (const auto& n : neighbors) deg = std::max(deg, n.size());
    return static_cast<int>(deg);
}

ConflictGraph build_conflict_graph(const std::vector<const Transaction*>& txns) {
    ConflictGraph g;
    g.vertices.reserve(txns.size());
    for (const auto* t : txns) g.vertices.push_back(t->id);
    g.neighbors.assign(txns.size(), {});
    for (std::size_t i = 0; i < txns.size(); ++i) {
        for (std::size_t j = i + 1; j < txns.size(); ++j) {
            if (conflicts(*txns[i], *txns[j])) {
                g.neighbors[i].push_back(static_cast<int>(j));
                g.neighbors[j].push_back(static_cast<int>(i));
            }
        }
    }
    return g;
}

Coloring greedy_color(const ConflictGraph& g) {
    Coloring c;
    c.color_of.assign(g.size(), -1);
    int max_color = -1;
    std::vector<char> used;
    for (std::size_t v = 0; v < g.size(); ++v) {
        used.assign(g.size(), 0);
        for (int n : g.neighbors[v]) {
            int col = c.color_of[static_cast<std::size_t>(n)];
            if (col >= 0) used[static_cast<std::size_t>(col)] = 1;
        }
        int col = 0;
        while (used[static_cast<std::size_t>(col)]) ++col;
        c.color_of[v] = col;
        max_color = std::max(max_color, col);
    }
    c.lambda = max_color + 1;
    return c;
}

}  // namespace shardsim
