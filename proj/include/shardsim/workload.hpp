#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shardsim/rational.hpp"
#include "shardsim/topology.hpp"
#include "shardsim/types.hpp"

namespace shardsim {

enum class InjectionPattern { Uniform, Bursty, Hotspot, Dos };

InjectionPattern parse_pattern(const std::string& name);
std::string to_string(InjectionPattern p);

struct WorkloadParams {
    Rational rho{1, 64};          // per-shard injection rate, 0 < rho <= 1
    int burstiness = 1;           // b >= 1
    int max_shards_per_txn = 1;   // k, 1 <= k <= s
    Time horizon = 100;
    InjectionPattern pattern = InjectionPattern::Uniform;
    int accounts_per_shard = 8;
    Rational write_fraction{1, 2};
    std::int64_t initial_balance = 1000;  // used to scale generated conditions
    std::uint64_t seed = 1;
    bool enforce_admissibility = true;  // false = negative-control flood, bucket gating off
};

struct InjectionTrace {
    std::vector<Transaction> txns;  // ordered by (gen_time, id)
    Rational rho;
    int burstiness = 1;
    Time horizon = 0;
};

/// Leaky-bucket adversary: per-shard buckets start at b, refill rho per time
/// unit, cap at b; a candidate is emitted only if every accessed shard has a
/// whole token, which each then pays. Deterministic under seed.
InjectionTrace generate_trace(const ShardGraph& g, const WorkloadParams& params);

struct AdmissibilityViolation {
    ShardId shard = 0;
    Time window_start = 0;
    Time window_end = 0;
    std::int64_t count = 0;

    bool operator==(const AdmissibilityViolation&) const = default;
};

struct AdmissibilityVerdict {
    bool ok = true;
    std::optional<AdmissibilityViolation> violation;
};

/// Exhaustive sliding-window oracle: for every shard and every pair of time
/// units t1 < t2, the transactions generated in [t1, t2] that access the
/// shard must number at most rho*(t2-t1) + b. Returns the lexicographically
/// smallest violating (shard, t1, t2). Shares no state with the generator.
AdmissibilityVerdict check_admissibility(const InjectionTrace& trace, const Rational& rho,
                                         int burstiness);

/// Same verdict as check_admissibility in O(shards * horizon) by tracking,
/// per shard, the running maximum of count(window) - rho*len(window).
/// Property-tested against the exhaustive oracle; used on long traces.
AdmissibilityVerdict check_admissibility_fast(const InjectionTrace& trace, const Rational& rho,
                                              int burstiness);

/// Line format: `id gen_time home shard:account:mode[,...]`, shard ids
/// 1-based, mode r|w. Conditions and deltas are not part of the format.
void write_trace(std::ostream& out, const InjectionTrace& trace);
InjectionTrace read_trace(std::istream& in, const Rational& rho, int burstiness, Time horizon);

}  // namespace shardsim
