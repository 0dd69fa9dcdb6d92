#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "shardsim/rational.hpp"
#include "shardsim/topology.hpp"
#include "shardsim/types.hpp"

namespace shardsim {

class CoverError : public std::runtime_error {
public:
    explicit CoverError(const std::string& what) : std::runtime_error(what) {}
};

/// (layer, sublayer) pair; the total order on heights is lexicographic.
struct Height {
    int layer = 0;
    int sublayer = 0;
    auto operator<=>(const Height&) const = default;
};

struct Cluster {
    ClusterId id = 0;
    Height height;
    std::vector<ShardId> members;  // sorted
    ShardId leader = 0;
    int radius_param = 0;  // 2^(layer-1) for layer >= 1, 0 at layer 0

    bool contains(ShardId s) const;
};

struct MeasuredConstants {
    Rational c_diam{0};     // smallest c with every layer-i diameter <= c * 2^i * max(1,ceil(log2 s))
    Rational c_overlap{0};  // smallest c with every per-layer membership <= c * max(1,ceil(log2 s))
    int layer_count = 0;    // L
    int max_sublayers = 0;  // M
};

/// Layered sparse cover of the shard graph. Layer 0 holds the per-shard
/// singletons; layer i >= 1 is an Awerbuch-Peleg style ball-growing cover of
/// all 2^(i-1)-balls, split into pairwise-disjoint sublayers by greedy
/// coloring of the cluster-intersection graph.
struct ClusterHierarchy {
    std::vector<Cluster> clusters;                             // indexed by cluster id
    std::vector<std::vector<std::vector<ClusterId>>> layers;   // layer -> sublayer -> clusters
    std::vector<std::vector<ClusterId>> shard_chain;           // shard -> clusters, height ascending
    std::map<ClusterId, std::vector<ClusterId>> parents;       // per-shard chain links, deduped
    std::map<ClusterId, std::vector<ClusterId>> children;
    MeasuredConstants measured;  // filled in by validate_cover

    int layer_count() const { return static_cast<int>(layers.size()); }
    ClusterId singleton_of(ShardId shard) const;

    /// Next cluster containing `shard` strictly below `c` on the shard's
    /// height chain; -1 when `c` is the shard's bottom cluster.
    ClusterId chain_child(ClusterId c, ShardId shard) const;
    /// Next cluster containing `shard` strictly above `c`; -1 at the top.
    ClusterId chain_parent(ClusterId c, ShardId shard) const;
};

ClusterHierarchy build_hierarchy(const ShardGraph& g);

struct LayerCheck {
    int layer = 0;
    int max_diameter = 0;
    int max_membership = 0;
    bool neighborhood_contained = true;  // property (iii) over all shards
};

struct CoverReport {
    std::vector<LayerCheck> layer_checks;  // layers >= 1
    std::vector<std::vector<ClusterId>> containment_witness;  // shard -> per-layer witness ids
    MeasuredConstants measured;
    bool pass = true;
    std::string failure;
};

/// Checks properties (i)-(iii) per layer. A property (iii) violation is a
/// hard failure; (i) and (ii) only calibrate the measured constants, which
/// are written back into the hierarchy.
CoverReport validate_cover(ClusterHierarchy& h, const ShardGraph& g);

/// Lowest-height cluster whose members contain the full z-neighborhood of
/// `home`, where z is the largest hop distance from home to any destination.
/// z = 0 returns the layer-0 singleton.
ClusterId home_cluster(const ClusterHierarchy& h, ShardId home, const std::set<ShardId>& dests,
                       const ShardGraph& g);

/// JSON dump: top-level array of {id, height, members, leader}, shard ids 1-based.
std::string cover_to_json(const ClusterHierarchy& h);

int ceil_log2(int n);  // n >= 1; ceil_log2(1) = 0

}  // namespace shardsim
