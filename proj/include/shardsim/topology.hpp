#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shardsim/types.hpp"

namespace shardsim {

class TopologyError : public std::runtime_error {
public:
    explicit TopologyError(const std::string& what) : std::runtime_error(what) {}
};

enum class TopologyKind { Clique, Line, Ring, Grid, RandomConnected };

TopologyKind parse_topology_kind(const std::string& name);
std::string to_string(TopologyKind kind);

struct TopologySpec {
    TopologyKind kind = TopologyKind::Clique;
    int shard_count = 1;
    int grid_rows = 0;   // grid only; rows * cols must equal shard_count
    int grid_cols = 0;
    std::uint64_t seed = 0;       // random-connected only
    double edge_prob = -1.0;      // random-connected; < 0 picks a connectivity-friendly default
};

/// Shard network with precomputed all-pairs hop distances.
/// Immutable after construction; safe to share across concurrent runs.
struct ShardGraph {
    int shard_count = 0;
    std::vector<std::vector<ShardId>> adjacency;
    std::vector<std::vector<int>> dist;
    int diameter = 0;

    bool has_edge(ShardId a, ShardId b) const;
};

/// Builds the shard graph, runs BFS from every shard, and records the diameter.
/// A disconnected random draw is retried with incremented sub-seeds up to a
/// fixed cap before failing with TopologyError.
ShardGraph build_graph(const TopologySpec& spec);

/// Exact hop distance; throws std::out_of_range on an unknown shard id.
int distance(const ShardGraph& g, ShardId a, ShardId b);

}  // namespace shardsim
