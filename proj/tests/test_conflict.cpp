#include <cstdint>

#include "doctest.h"
#include "shardsim/conflict.hpp"

using namespace shardsim;

namespace {

Transaction make_txn(TxnId id, std::vector<std::tuple<ShardId, AccountId, AccessMode>> accs) {
    Transaction t;
    t.id = id;
    t.home = 0;
    for (auto [shard, account, mode] : accs) {
        AccountAccess a;
        a.account = account;
        a.mode = mode;
        t.accesses[shard].push_back(a);
    }
    return t;
}

// Brute-force chromatic number for graphs with at most 8 vertices.
int chromatic_number(const ConflictGraph& g) {
    const int n = static_cast<int>(g.size());
    if (n == 0) return 0;
    for (int colors = 1; colors <= n; ++colors) {
        std::vector<int> assign(n, 0);
        std::int64_t total = 1;
        for (int i = 0; i < n; ++i) total *= colors;
        for (std::int64_t code = 0; code < total; ++code) {
            std::int64_t c = code;
            for (int i = 0; i < n; ++i) {
                assign[i] = static_cast<int>(c % colors);
                c /= colors;
            }
            bool proper = true;
            for (int v = 0; v < n && proper; ++v)
                for (int u : g.neighbors[v])
                    if (u > v && assign[u] == assign[v]) {
                        proper = false;
                        break;
                    }
            if (proper) return colors;
        }
    }
    return n;
}

struct Lcg {
    std::uint64_t s;
    std::uint64_t next() { return s = s * 6364136223846793005ULL + 1442695040888963407ULL; }
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

ConflictGraph random_graph(Lcg& rng, int n, int edge_pct) {
    ConflictGraph g;
    g.neighbors.assign(n, {});
    for (int v = 0; v < n; ++v) g.vertices.push_back(v + 1);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (static_cast<int>(rng.below(100)) < edge_pct) {
                g.neighbors[i].push_back(j);
                g.neighbors[j].push_back(i);
            }
    return g;
}

bool coloring_is_proper(const ConflictGraph& g, const Coloring& c) {
    for (std::size_t v = 0; v < g.size(); ++v)
        for (int u : g.neighbors[v])
            if (c.color_of[v] == c.color_of[static_cast<std::size_t>(u)]) return false;
    return true;
}

}  // namespace

TEST_CASE("conflict definition") {
    auto w5 = make_txn(1, {{0, 5, AccessMode::Write}});
    auto r5 = make_txn(2, {{0, 5, AccessMode::Read}});
    auto r5b = make_txn(3, {{0, 5, AccessMode::Read}});
    auto other = make_txn(4, {{0, 6, AccessMode::Write}, {1, 5, AccessMode::Write}});
    CHECK(conflicts(w5, r5));        // write-read on one account
    CHECK_FALSE(conflicts(r5, r5b)); // read-read never conflicts
    CHECK_FALSE(conflicts(w5, other));  // same account id on another shard is a different object
}

TEST_CASE("conflict graph shapes") {
    CHECK(build_conflict_graph({}).size() == 0);

    auto a = make_txn(1, {{0, 0, AccessMode::Write}});
    auto b = make_txn(2, {{0, 0, AccessMode::Write}});
    auto c = make_txn(3, {{0, 0, AccessMode::Write}});
    auto k3 = build_conflict_graph({&a, &b, &c});
    CHECK(k3.edge_count() == 3);

    // chain T1-T2, T2-T3 with T1, T3 disjoint
    auto t1 = make_txn(1, {{0, 0, AccessMode::Write}});
    auto t2 = make_txn(2, {{0, 0, AccessMode::Read}, {1, 1, AccessMode::Write}});
    auto t3 = make_txn(3, {{1, 1, AccessMode::Read}});
    auto path = build_conflict_graph({&t1, &t2, &t3});
    CHECK(path.edge_count() == 2);
    CHECK(path.neighbors[0] == std::vector<int>{1});
    CHECK(path.neighbors[2] == std::vector<int>{1});
}

TEST_CASE("greedy coloring frozen examples") {
    ConflictGraph empty;
    CHECK(greedy_color(empty).lambda == 0);

    auto a = make_txn(1, {{0, 0, AccessMode::Write}});
    auto b = make_txn(2, {{0, 0, AccessMode::Write}});
    auto c = make_txn(3, {{0, 0, AccessMode::Write}});
    auto k3 = greedy_color(build_conflict_graph({&a, &b, &c}));
    CHECK(k3.lambda == 3);

    auto t1 = make_txn(1, {{0, 0, AccessMode::Write}});
    auto t2 = make_txn(2, {{0, 0, AccessMode::Read}, {1, 1, AccessMode::Write}});
    auto t3 = make_txn(3, {{1, 1, AccessMode::Read}});
    auto path = greedy_color(build_conflict_graph({&t1, &t2, &t3}));
    CHECK(path.color_of == std::vector<int>{0, 1, 0});
    CHECK(path.lambda == 2);
}

TEST_CASE("greedy coloring is proper and within degree+1 on random graphs") {
    Lcg rng{12345};
    for (int trial = 0; trial < 300; ++trial) {
        int n = 1 + static_cast<int>(rng.below(40));
        int pct = static_cast<int>(rng.below(95));
        auto g = random_graph(rng, n, pct);
        auto c = greedy_color(g);
        CHECK(coloring_is_proper(g, c));
        CHECK(c.lambda <= g.max_degree() + 1);
    }
}

TEST_CASE("greedy lambda is at least the brute-force chromatic number") {
    Lcg rng{777};
    for (int trial = 0; trial < 60; ++trial) {
        int n = 1 + static_cast<int>(rng.below(8));
        auto g = random_graph(rng, n, 40 + static_cast<int>(rng.below(40)));
        auto c = greedy_color(g);
        CHECK(coloring_is_proper(g, c));
        CHECK(c.lambda >= chromatic_number(g));
    }
}
