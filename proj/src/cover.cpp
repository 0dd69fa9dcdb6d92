#include "shardsim/cover.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace shardsim {

namespace {

std::vector<ShardId> ball(const ShardGraph& g, ShardId center, int radius) {
    std::vector<ShardId> out;
    for (ShardId v = 0; v < g.shard_count; ++v) {
        if (g.dist[static_cast<std::size_t>(center)][static_cast<std::size_t>(v)] <= radius)
            out.push_back(v);
    }
    return out;
}

bool contains_all(const std::vector<ShardId>& sorted_members, const std::vector<ShardId>& want) {
    return std::includes(sorted_members.begin(), sorted_members.end(), want.begin(), want.end());
}

/// Diameter of the subgraph induced on `members`; -1 if disconnected.
int induced_diameter(const ShardGraph& g, const std::vector<ShardId>& members) {
    std::vector<int> index(static_cast<std::size_t>(g.shard_count), -1);
    for (std::size_t i = 0; i < members.size(); ++i)
        index[static_cast<std::size_t>(members[i])] = static_cast<int>(i);
    int diameter = 0;
    for (ShardId src : members) {
        std::vector<int> d(members.size(), -1);
        std::deque<ShardId> q;
        d[static_cast<std::size_t>(index[static_cast<std::size_t>(src)])] = 0;
        q.push_back(src);
        while (!q.empty()) {
            ShardId u = q.front();
            q.pop_front();
            int du = d[static_cast<std::size_t>(index[static_cast<std::size_t>(u)])];
            for (ShardId v : g.adjacency[static_cast<std::size_t>(u)]) {
                int iv = index[static_cast<std::size_t>(v)];
                if (iv < 0 || d[static_cast<std::size_t>(iv)] >= 0) continue;
                d[static_cast<std::size_t>(iv)] = du + 1;
                q.push_back(v);
            }
        }
        for (int dv : d) {
            if (dv < 0) return -1;
            diameter = std::max(diameter, dv);
        }
    }
    return diameter;
}

}  // namespace

int ceil_log2(int n) {
    int log = 0;
    int v = 1;
    while (v < n) {
        v <<= 1;
        ++log;
    }
    return log;
}

bool Cluster::contains(ShardId s) const {
    return std::binary_search(members.begin(), members.end(), s);
}

ClusterId ClusterHierarchy::singleton_of(ShardId shard) const {
    return shard_chain[static_cast<std::size_t>(shard)].front();
}

ClusterId ClusterHierarchy::chain_child(ClusterId c, ShardId shard) const {
    const auto& chain = shard_chain[static_cast<std::size_t>(shard)];
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (chain[i] == c) return i == 0 ? -1 : chain[i - 1];
    }
    throw CoverError("cluster not on shard chain");
}

ClusterId ClusterHierarchy::chain_parent(ClusterId c, ShardId shard) const {
    const auto& chain = shard_chain[static_cast<std::size_t>(shard)];
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (chain[i] == c) return i + 1 == chain.size() ? -1 : chain[i + 1];
    }
    throw CoverError("cluster not on shard chain");
}

ClusterHierarchy build_hierarchy(const ShardGraph& g) {
    const int s = g.shard_count;
    ClusterHierarchy h;
    const int layer_count = ceil_log2(std::max(1, g.diameter)) + 2;

    // Layer 0: one singleton per shard, single sublayer.
    h.layers.assign(static_cast<std::size_t>(layer_count), {});
    h.layers[0].push_back({});
    for (ShardId v = 0; v < s; ++v) {
        Cluster c;
        c.id = static_cast<ClusterId>(h.clusters.size());
        c.height = Height{0, 0};
        c.members = {v};
        c.leader = v;
        c.radius_param = 0;
        h.layers[0][0].push_back(c.id);
        h.clusters.push_back(std::move(c));
    }

    for (int layer = 1; layer < layer_count; ++layer) {
        const int r = 1 << (layer - 1);

        // Ball growing with geometric stopping: extend the core while the
        // next r-increment at least doubles the member count; the carved
        // cluster is one increment beyond the core, and every r-ball
        // centered inside the core is covered by it.
        std::vector<char> retired(static_cast<std::size_t>(s), 0);
        std::vector<std::vector<ShardId>> carved;
        for (ShardId seed = 0; seed < s; ++seed) {
            if (retired[static_cast<std::size_t>(seed)]) continue;
            int core_radius = 0;
            std::size_t core_size = 1;
            while (true) {
                std::size_t grown = ball(g, seed, core_radius + r).size();
                if (grown >= 2 * core_size) {
                    core_radius += r;
                    core_size = grown;
                } else {
                    break;
                }
            }
            for (ShardId u : ball(g, seed, core_radius)) retired[static_cast<std::size_t>(u)] = 1;
            carved.push_back(ball(g, seed, core_radius + r));
        }

        // Sublayer assignment: greedy coloring of the cluster-intersection
        // graph in carve order, so each sublayer is a partition.
        std::vector<int> sublayer_of(carved.size(), -1);
        int sublayers = 0;
        for (std::size_t i = 0; i < carved.size(); ++i) {
            std::vector<char> used(carved.size() + 1, 0);
            for (std::size_t j = 0; j < i; ++j) {
                std::vector<ShardId> common;
                std::set_intersection(carved[i].begin(), carved[i].end(), carved[j].begin(),
                                      carved[j].end(), std::back_inserter(common));
                if (!common.empty()) used[static_cast<std::size_t>(sublayer_of[j])] = 1;
            }
            int color = 0;
            while (used[static_cast<std::size_t>(color)]) ++color;
            sublayer_of[i] = color;
            sublayers = std::max(sublayers, color + 1);
        }

        h.layers[static_cast<std::size_t>(layer)].assign(static_cast<std::size_t>(sublayers), {});
        for (std::size_t i = 0; i < carved.size(); ++i) {
            Cluster c;
            c.id = static_cast<ClusterId>(h.clusters.size());
            c.height = Height{layer, sublayer_of[i]};
            c.members = std::move(carved[i]);
            c.radius_param = r;
            c.leader = -1;
            for (ShardId m : c.members) {
                if (contains_all(c.members, ball(g, m, r))) {
                    c.leader = m;
                    break;
                }
            }
            if (c.leader < 0) throw CoverError("no admissible leader for cluster");
            h.layers[static_cast<std::size_t>(layer)][static_cast<std::size_t>(sublayer_of[i])]
                .push_back(c.id);
            h.clusters.push_back(std::move(c));
        }
    }

    // Per-shard height chains; heights within a chain are strictly
    // increasing because sublayers are partitions.
    h.shard_chain.assign(static_cast<std::size_t>(s), {});
    std::vector<ClusterId> order(h.clusters.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<ClusterId>(i);
    std::sort(order.begin(), order.end(), [&](ClusterId a, ClusterId b) {
        return h.clusters[static_cast<std::size_t>(a)].height <
               h.clusters[static_cast<std::size_t>(b)].height;
    });
    for (ClusterId cid : order) {
        for (ShardId m : h.clusters[static_cast<std::size_t>(cid)].members)
            h.shard_chain[static_cast<std::size_t>(m)].push_back(cid);
    }

    for (const auto& c : h.clusters) {
        std::set<ClusterId> kids;
        std::set<ClusterId> pars;
        for (ShardId m : c.members) {
            ClusterId down = h.chain_child(c.id, m);
            if (down >= 0) kids.insert(down);
            ClusterId up = h.chain_parent(c.id, m);
            if (up >= 0) pars.insert(up);
        }
        h.children[c.id] = std::vector<ClusterId>(kids.begin(), kids.end());
        h.parents[c.id] = std::vector<ClusterId>(pars.begin(), pars.end());
    }
    return h;
}

CoverReport validate_cover(ClusterHierarchy& h, const ShardGraph& g) {
    const int s = g.shard_count;
    const int log_term = std::max(1, ceil_log2(s));
    CoverReport report;
    report.containment_witness.assign(static_cast<std::size_t>(s), {});

    Rational c_diam(0);
    Rational c_overlap(0);
    int max_sublayers = 1;

    for (int layer = 1; layer < h.layer_count(); ++layer) {
        const int r = 1 << (layer - 1);
        LayerCheck check;
        check.layer = layer;
        max_sublayers = std::max(
            max_sublayers, static_cast<int>(h.layers[static_cast<std::size_t>(layer)].size()));

        std::vector<int> membership(static_cast<std::size_t>(s), 0);
        for (const auto& sublayer : h.layers[static_cast<std::size_t>(layer)]) {
            std::vector<char> seen(static_cast<std::size_t>(s), 0);
            for (ClusterId cid : sublayer) {
                const Cluster& c = h.clusters[static_cast<std::size_t>(cid)];
                int diam = induced_diameter(g, c.members);
                if (diam < 0) {
                    report.pass = false;
                    report.failure = "cluster " + std::to_string(cid) + " induces a disconnected subgraph";
                    continue;
                }
                check.max_diameter = std::max(check.max_diameter, diam);
                c_diam = max(c_diam, Rational(diam, static_cast<std::int64_t>(1 << layer) * log_term));
                for (ShardId m : c.members) {
                    if (seen[static_cast<std::size_t>(m)]) {
                        report.pass = false;
                        report.failure = "sublayer is not a partition at layer " + std::to_string(layer);
                    }
                    seen[static_cast<std::size_t>(m)] = 1;
                    membership[static_cast<std::size_t>(m)] += 1;
                }
            }
        }
        for (ShardId v = 0; v < s; ++v) {
            check.max_membership = std::max(check.max_membership, membership[static_cast<std::size_t>(v)]);
            c_overlap = max(c_overlap, Rational(membership[static_cast<std::size_t>(v)], log_term));
        }

        // Property (iii): every shard's full r-neighborhood sits inside some
        // cluster of this layer. A violation makes the home-cluster rule
        // unsound, so it is a hard failure.
        for (ShardId v = 0; v < s; ++v) {
            auto need = ball(g, v, r);
            ClusterId witness = -1;
            for (ClusterId cid : h.shard_chain[static_cast<std::size_t>(v)]) {
                const Cluster& c = h.clusters[static_cast<std::size_t>(cid)];
                if (c.height.layer != layer) continue;
                if (contains_all(c.members, need)) {
                    witness = cid;
                    break;
                }
            }
            report.containment_witness[static_cast<std::size_t>(v)].push_back(witness);
            if (witness < 0) {
                check.neighborhood_contained = false;
                report.pass = false;
                report.failure = "no layer-" + std::to_string(layer) + " cluster contains the " +
                                 std::to_string(r) + "-neighborhood of shard " + std::to_string(v + 1);
            }
        }
        report.layer_checks.push_back(check);
    }

    report.measured.c_diam = c_diam;
    report.measured.c_overlap = c_overlap;
    report.measured.layer_count = h.layer_count();
    report.measured.max_sublayers = max_sublayers;
    h.measured = report.measured;
    return report;
}

ClusterId home_cluster(const ClusterHierarchy& h, ShardId home, const std::set<ShardId>& dests,
                       const ShardGraph& g) {
    if (dests.empty()) throw CoverError("home_cluster requires a non-empty destination set");
    int z = 0;
    for (ShardId d : dests) z = std::max(z, distance(g, home, d));
    if (z == 0) return h.singleton_of(home);
    auto need = ball(g, home, z);
    // Any admissible cluster contains home, so it lies on home's chain;
    // the chain is height-ascending, so the first hit is the lowest height.
    for (ClusterId cid : h.shard_chain[static_cast<std::size_t>(home)]) {
        const Cluster& c = h.clusters[static_cast<std::size_t>(cid)];
        if (contains_all(c.members, need)) return cid;
    }
    throw CoverError("no cluster contains the z-neighborhood; cover is invalid");
}

std::string cover_to_json(const ClusterHierarchy& h) {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < h.clusters.size(); ++i) {
        const Cluster& c = h.clusters[i];
        if (i) out << ",";
        out << "\n  {\"id\": " << c.id << ", \"height\": [" << c.height.layer << ", "
            << c.height.sublayer << "], \"members\": [";
        for (std::size_t m = 0; m < c.members.size(); ++m) {
            if (m) out << ", ";
            out << (c.members[m] + 1);
        }
        out << "], \"leader\": " << (c.leader + 1) << "}";
    }
    out << "\n]\n";
    return out.str();
}

}  // namespace shardsim
