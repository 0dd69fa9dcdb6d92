#pragma once

#include <optional>
#include <vector>

#include "shardsim/types.hpp"

namespace shardsim {

/// Two transactions conflict iff they touch a common account and at least
/// one of the two accesses it in write mode.
bool conflicts(const Transaction& t1, const Transaction& t2);

/// Undirected conflict graph over a batch of transactions.
/// Vertex order is the pending-queue arrival order and fixes the greedy
/// coloring result.
struct ConflictGraph {
    std::vector<TxnId> vertices;               // arrival order
    std::vector<std::vector<int>> neighbors;   // indices into vertices
    std::optional<Version> version;

    std::size_t size() const { return vertices.size(); }
    std::size_t edge_count() const;
    int max_degree() const;
};

ConflictGraph build_conflict_graph(const std::vector<const Transaction*>& txns);

struct Coloring {
    std::vector<int> color_of;  // parallel to graph vertices
    int lambda = 0;             // number of colors used = schedule length
};

/// Greedy vertex coloring in vertex order: each vertex takes the smallest
/// color not used by an already-colored neighbor. lambda <= max degree + 1.
Coloring greedy_color(const ConflictGraph& g);

}  // namespace shardsim
