#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shardsim/message.hpp"
#include "shardsim/rational.hpp"
#include "shardsim/types.hpp"

namespace shardsim {

struct PerUnitRow {
    Time time = 0;
    std::int64_t combined_pending = 0;   // injected but not yet committed/aborted
    std::int64_t messages_in_flight = 0;
};

struct PerTxnRow {
    TxnId id = 0;
    Time gen = 0;
    Time done = 0;
    Time latency = 0;
    TxnStatus status = TxnStatus::Committed;
};

struct MetricsLog {
    std::vector<PerUnitRow> per_unit;
    std::vector<std::vector<int>> per_shard_pending;  // per unit, per shard
    std::vector<PerTxnRow> per_txn;                   // completion order

    std::int64_t max_combined_pending = 0;
    Time max_latency = 0;  // over finished transactions
    std::int64_t committed = 0;
    std::int64_t aborted = 0;
    std::int64_t injected = 0;
    std::vector<std::pair<TxnId, Time>> unfinished;  // (id, gen_time), still pending at run end

    std::int64_t emitted_messages = 0;
    std::int64_t delivered_messages = 0;
    std::int64_t undelivered_at_end = 0;
};

enum class SchedulerMode { Single, Multi };

/// Closed-form stability quantities; multi-leader forms substitute the
/// measured L*M of the validated cover for the analysis constant.
struct BoundSet {
    SchedulerMode mode = SchedulerMode::Single;
    Rational tau{0};
    Rational rho_limit{0};      // rho' (single) or rho'' (multi)
    Rational zeta{0};
    Rational queue_bound{0};    // 2 * zeta
    Rational latency_bound{0};  // 2 * tau
    Rational reference_optimum{0};
    std::int64_t cover_factor = 1;  // 1 (single) or measured L*M (multi)
};

struct BoundParams {
    int shard_count = 1;
    int max_shards_per_txn = 1;  // k
    int burstiness = 1;
    int frak_d = 2;
    Rational rho{1, 64};
    SchedulerMode mode = SchedulerMode::Single;
    std::int64_t measured_lm = 1;  // required in multi mode
};

BoundSet compute_bounds(const BoundParams& p);

struct VerdictReport {
    bool queue_ok = true;
    bool latency_ok = true;
    bool liveness_ok = true;  // nothing unfinished past the 2*tau grace window
    std::int64_t observed_max_pending = 0;
    Time observed_max_latency = 0;
    Rational queue_margin{0};    // observed / bound
    Rational latency_margin{0};
    std::int64_t excluded_unfinished = 0;  // unfinished but inside the grace window
    bool pass() const { return queue_ok && latency_ok && liveness_ok; }
};

/// Checks the run against the mode-appropriate bounds. Transactions still
/// unfinished at the horizon whose 2*tau deadline lies beyond the horizon
/// are excluded from the latency maxima and counted separately.
VerdictReport check_run(const MetricsLog& log, const BoundSet& bounds, Time horizon);

/// Per-account occupancy accounting exported by a destination shard.
struct OccupancyStats {
    std::int64_t occupy_events = 0;
    std::int64_t release_events = 0;
    std::int64_t occupied_now = 0;
};

struct RunValidation {
    bool serializable = true;
    bool atomic = true;
    bool color_discipline = true;
    bool occupancy_balanced = true;
    std::string detail;
    bool pass() const { return serializable && atomic && color_discipline && occupancy_balanced; }
};

/// Run-end safety checks over all ledgers: conflicting committed pairs are
/// ordered identically on every shard holding both, committed transactions
/// appear exactly once per destination (aborted nowhere), ledger batches
/// keep ascending color order with conflict-free color groups, and
/// occupy/release events balance per shard.
RunValidation validate_run(const std::map<TxnId, Transaction>& txns,
                           const std::vector<std::vector<LedgerEntry>>& ledgers,
                           const std::vector<OccupancyStats>& occupancy);

std::string per_unit_csv(const MetricsLog& log);
std::string per_txn_csv(const MetricsLog& log);

}  // namespace shardsim
