#include <algorithm>

#include "doctest.h"
#include "shardsim/topology.hpp"

using namespace shardsim;

namespace {

// Independent Floyd-Warshall oracle for the distance tables.
std::vector<std::vector<int>> floyd_warshall(const ShardGraph& g) {
    const int s = g.shard_count;
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(s, std::vector<int>(s, inf));
    for (int v = 0; v < s; ++v) d[v][v] = 0;
    for (int v = 0; v < s; ++v)
        for (ShardId n : g.adjacency[v]) d[v][n] = 1;
    for (int k = 0; k < s; ++k)
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

void check_against_oracle(const ShardGraph& g) {
    auto oracle = floyd_warshall(g);
    int max_d = 0;
    for (int i = 0; i < g.shard_count; ++i) {
        for (int j = 0; j < g.shard_count; ++j) {
            CHECK(g.dist[i][j] == oracle[i][j]);
            max_d = std::max(max_d, oracle[i][j]);
        }
    }
    CHECK(g.diameter == max_d);
}

}  // namespace

TEST_CASE("clique distances") {
    auto g = build_graph({TopologyKind::Clique, 4});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(g.dist[i][j] == (i == j ? 0 : 1));
    CHECK(g.diameter == 1);
    CHECK(distance(g, 0, 1) == 1);  // clique s=3 example holds for any clique
    CHECK(distance(g, 2, 2) == 0);
}

TEST_CASE("line distances and diameter") {
    auto g = build_graph({TopologyKind::Line, 5});
    CHECK(distance(g, 0, 4) == 4);  // S1..S5
    CHECK(g.diameter == 4);
    auto g4 = build_graph({TopologyKind::Line, 4});
    CHECK(distance(g4, 1, 3) == 2);  // S2 to S4
}

TEST_CASE("ring diameter from BFS oracle") {
    auto g = build_graph({TopologyKind::Ring, 6});
    CHECK(g.diameter == 3);
    check_against_oracle(g);
}

TEST_CASE("grid layout") {
    TopologySpec spec;
    spec.kind = TopologyKind::Grid;
    spec.shard_count = 16;
    spec.grid_rows = 4;
    spec.grid_cols = 4;
    auto g = build_graph(spec);
    CHECK(g.diameter == 6);
    check_against_oracle(g);
    spec.grid_cols = 5;
    CHECK_THROWS_AS(build_graph(spec), TopologyError);
}

TEST_CASE("distance table equals Floyd-Warshall on assorted graphs") {
    for (int s : {1, 2, 3, 7, 16, 33}) {
        check_against_oracle(build_graph({TopologyKind::Clique, s}));
        check_against_oracle(build_graph({TopologyKind::Line, s}));
        check_against_oracle(build_graph({TopologyKind::Ring, s}));
    }
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 17ULL}) {
        TopologySpec spec;
        spec.kind = TopologyKind::RandomConnected;
        spec.shard_count = 24;
        spec.seed = seed;
        check_against_oracle(build_graph(spec));
    }
}

TEST_CASE("random graphs are deterministic under seed") {
    TopologySpec spec;
    spec.kind = TopologyKind::RandomConnected;
    spec.shard_count = 20;
    spec.seed = 42;
    auto a = build_graph(spec);
    auto b = build_graph(spec);
    CHECK(a.adjacency == b.adjacency);
}

TEST_CASE("hopelessly sparse random draw is rejected after retries") {
    TopologySpec spec;
    spec.kind = TopologyKind::RandomConnected;
    spec.shard_count = 30;
    spec.seed = 7;
    spec.edge_prob = 0.0;
    CHECK_THROWS_AS(build_graph(spec), TopologyError);
}

TEST_CASE("unknown shard id is an input error") {
    auto g = build_graph({TopologyKind::Clique, 3});
    CHECK_THROWS_AS(distance(g, 0, 3), std::out_of_range);
    CHECK_THROWS_AS(distance(g, -1, 0), std::out_of_range);
}
