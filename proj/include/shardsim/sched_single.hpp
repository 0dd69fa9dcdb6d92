#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "shardsim/conflict.hpp"
#include "shardsim/message.hpp"
#include "shardsim/metrics.hpp"
#include "shardsim/simkernel.hpp"
#include "shardsim/types.hpp"

namespace shardsim {

/// Hook a scheduler provides to its leader pipelines. The single-leader
/// scheduler always grants; the multi-leader scheduler gates scheduling
/// events on holding the schedule-control tokens of every accessed shard.
class PipelineHost {
public:
    virtual ~PipelineHost() = default;
    virtual bool may_schedule(Engine& engine, ClusterId cluster,
                              const std::vector<ShardId>& shards) = 0;
    virtual void on_pipeline_idle(Engine& engine, ClusterId cluster) {}
};

/// Leader-shard state machine of the event-driven scheduler: pending and
/// scheduled queues, versioned batches with frozen colorings, the
/// schedule-length trigger, pre-commit processing in color order, and final
/// commit bookkeeping.
class LeaderPipeline {
public:
    LeaderPipeline(ClusterId cluster, ShardId leader_shard, PipelineHost& host,
                   bool weight_by_subtxns = false);

    void on_transaction_send(Engine& engine, TxnId txn);
    void on_account_state_response(Engine& engine, const AccountStateResponsePayload& payload);
    void on_final_commit_response(Engine& engine, const FinalCommitResponsePayload& payload);
    void on_color_timer(Engine& engine, Version version, int color);

    /// Re-evaluates the scheduling trigger (lambda >= LastEventSchLength);
    /// fires a scheduling event when the host grants the accessed shards.
    void try_trigger(Engine& engine);

    ClusterId cluster() const { return cluster_; }
    ShardId leader_shard() const { return leader_shard_; }
    int last_event_sch_length() const { return last_event_sch_length_; }
    Version version_counter() const { return version_counter_; }
    bool pq_empty() const { return pq_.empty(); }
    std::size_t pq_size() const { return pq_.size(); }
    bool has_inflight() const { return !inflight_.empty(); }
    bool inflight_touches(ShardId shard) const;
    std::vector<ShardId> pending_shards(const Engine& engine) const;

private:
    struct InFlight {
        std::vector<TxnId> batch;  // arrival order
        std::map<TxnId, int> color_of;
        int lambda = 0;
        std::set<std::pair<ShardId, AccountId>> awaited;
        std::map<std::pair<ShardId, AccountId>, std::int64_t> values;  // fetched, then working copy
        std::map<TxnId, std::set<ShardId>> awaiting_commit;            // precommitted only
        std::map<TxnId, Time> last_append;
        std::set<ShardId> involved;
        std::map<ShardId, std::vector<SubTxn>> out_subtxns;
        std::map<ShardId, std::set<AccountId>> out_abort_releases;
        bool states_complete = false;
        int groups_processed = 0;
    };

    void fire_event(Engine& engine, const ConflictGraph& graph, const Coloring& coloring);
    void process_group(Engine& engine, Version version, int color);
    void emit_precommit_batches(Engine& engine, Version version);
    void decrement_schedule_length(Engine& engine, Version version, TxnId txn);
    void maybe_retire(Engine& engine, Version version);
    int weight_of(const Engine& engine, TxnId txn) const;

    ClusterId cluster_;
    ShardId leader_shard_;
    PipelineHost& host_;
    bool weight_by_subtxns_;

    std::vector<TxnId> pq_;
    std::map<Version, InFlight> inflight_;
    Version version_counter_ = 0;
    Version latest_version_ = 0;
    int last_event_sch_length_ = 0;
};

/// Destination-shard state: account values and occupancy, the deferred
/// state-request queue, and the append-only ledger.
class DestinationShard {
public:
    DestinationShard(ShardId shard, int accounts_per_shard, std::int64_t initial_balance);

    void on_account_state_request(Engine& engine, const Message& msg);
    void on_precommit_batch(Engine& engine, const Message& msg);
    void on_consensus_timer(Engine& engine, const Timer& timer);

    const std::vector<LedgerEntry>& ledger() const { return ledger_; }
    OccupancyStats occupancy_stats() const;
    std::int64_t balance(AccountId account) const;
    bool occupied(AccountId account) const { return occupied_.count(account) > 0; }

private:
    using BatchKey = std::pair<ClusterId, Version>;

    struct PendingRequest {
        std::uint64_t seq = 0;  // arrival order
        BatchKey key;
        ShardId reply_to = 0;
        std::vector<AccountId> accounts;
    };

    struct StagedBatch {
        BatchKey key;
        ShardId reply_to = 0;
        std::vector<SubTxn> subtxns;
        std::vector<AccountId> abort_releases;
    };

    /// FIFO-with-claiming grant scan: walk deferred requests in arrival
    /// order; a request is granted only when every account it needs is free
    /// and not claimed by an earlier still-blocked request. Keeps grants in
    /// arrival order per account, so no request can be overtaken on an
    /// account it is waiting for.
    void scan(Engine& engine);
    void grant(Engine& engine, const PendingRequest& request);

    ShardId shard_;
    std::vector<std::int64_t> values_;
    std::map<AccountId, BatchKey> occupied_;
    std::vector<PendingRequest> deferred_;
    std::map<BatchKey, std::vector<AccountId>> occupied_by_;
    std::map<BatchKey, StagedBatch> staged_;
    std::vector<LedgerEntry> ledger_;
    std::int64_t occupy_events_ = 0;
    std::int64_t release_events_ = 0;
};

/// EdSl scheduler: one leader shard runs the pipeline for the whole system;
/// every shard doubles as a destination for its own account partition.
class SingleLeaderScheduler : public Protocol, public PipelineHost {
public:
    SingleLeaderScheduler(const ShardGraph& g, ShardId leader_shard, int accounts_per_shard,
                          std::int64_t initial_balance, bool weight_by_subtxns = false);

    void on_inject(Engine& engine, const Transaction& txn) override;
    void on_message(Engine& engine, const Message& msg) override;
    void on_timer(Engine& engine, const Timer& timer) override;

    bool may_schedule(Engine&, ClusterId, const std::vector<ShardId>&) override { return true; }

    const LeaderPipeline& pipeline() const { return pipeline_; }
    std::vector<std::vector<LedgerEntry>> ledgers() const;
    std::vector<OccupancyStats> occupancy() const;
    const DestinationShard& destination(ShardId shard) const {
        return destinations_[static_cast<std::size_t>(shard)];
    }

private:
    ShardId leader_shard_;
    LeaderPipeline pipeline_;
    std::vector<DestinationShard> destinations_;
};

}  // namespace shardsim
