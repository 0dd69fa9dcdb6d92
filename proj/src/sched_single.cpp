#include "shardsim/sched_single.hpp"

#include <algorithm>

namespace shardsim {

// ---------------------------------------------------------------------------
// LeaderPipeline

LeaderPipeline::LeaderPipeline(ClusterId cluster, ShardId leader_shard, PipelineHost& host,
                               bool weight_by_subtxns)
    : cluster_(cluster), leader_shard_(leader_shard), host_(host),
      weight_by_subtxns_(weight_by_subtxns) {}

bool LeaderPipeline::inflight_touches(ShardId shard) const {
    for (const auto& [version, fl] : inflight_) {
        if (fl.involved.count(shard)) return true;
    }
    return false;
}

std::vector<ShardId> LeaderPipeline::pending_shards(const Engine& engine) const {
    std::set<ShardId> shards;
    for (TxnId id : pq_) {
        for (const auto& [shard, _] : engine.txn(id).accesses) shards.insert(shard);
    }
    return {shards.begin(), shards.end()};
}

void LeaderPipeline::on_transaction_send(Engine& engine, TxnId txn) {
    pq_.push_back(txn);
    try_trigger(engine);
}

void LeaderPipeline::try_trigger(Engine& engine) {
    if (pq_.empty()) return;
    std::vector<const Transaction*> txns;
    txns.reserve(pq_.size());
    for (TxnId id : pq_) txns.push_back(&engine.txn(id));
    ConflictGraph graph = build_conflict_graph(txns);
    Coloring coloring = greedy_color(graph);
    if (coloring.lambda < last_event_sch_length_) return;
    if (!host_.may_schedule(engine, cluster_, pending_shards(engine))) return;
    fire_event(engine, graph, coloring);
}

void LeaderPipeline::fire_event(Engine& engine, const ConflictGraph& graph,
                                const Coloring& coloring) {
    version_counter_ += 1;
    const Version version = version_counter_;
    latest_version_ = version;
    last_event_sch_length_ = coloring.lambda;

    InFlight fl;
    fl.batch = pq_;
    fl.lambda = coloring.lambda;
    for (std::size_t i = 0; i < graph.vertices.size(); ++i)
        fl.color_of[graph.vertices[i]] = coloring.color_of[i];
    pq_.clear();

    std::map<ShardId, std::set<AccountId>> wanted;
    for (TxnId id : fl.batch) {
        Transaction& txn = engine.txn_mut(id);
        txn.status = TxnStatus::Scheduled;
        for (const auto& [shard, accs] : txn.accesses) {
            fl.involved.insert(shard);
            for (const auto& a : accs) {
                wanted[shard].insert(a.account);
                fl.awaited.insert({shard, a.account});
            }
        }
    }

    auto [it, fresh] = inflight_.emplace(version, std::move(fl));
    if (!fresh) throw ProtocolViolation("scheduling event reused a version number");

    for (const auto& [shard, accounts] : wanted) {
        AccountStateRequestPayload payload;
        payload.cluster = cluster_;
        payload.version = version;
        payload.accounts.assign(accounts.begin(), accounts.end());
        engine.emit_message(MsgKind::AccountStateRequest, leader_shard_, shard,
                            std::move(payload), version);
    }
}

void LeaderPipeline::on_account_state_response(Engine& engine,
                                               const AccountStateResponsePayload& payload) {
    auto it = inflight_.find(payload.version);
    if (it == inflight_.end())
        throw ProtocolViolation("account_state_response for unknown version");
    InFlight& fl = it->second;
    for (const auto& [account, value] : payload.values) {
        auto key = std::make_pair(payload.shard, account);
        if (!fl.awaited.erase(key))
            throw ProtocolViolation("duplicate account state for a version");
        fl.values[key] = value;
    }
    if (!fl.awaited.empty()) return;

    fl.states_complete = true;
    // Serial pre-commit: color group k is handled k units after the states
    // complete, charging the schedule length against simulated time.
    process_group(engine, payload.version, 0);
    for (int color = 1; color < fl.lambda; ++color) {
        Timer t;
        t.kind = TimerKind::ProcessColorGroup;
        t.shard = leader_shard_;
        t.cluster = cluster_;
        t.version = payload.version;
        t.color = color;
        engine.schedule_timer(engine.now() + color, t);
    }
}

void LeaderPipeline::on_color_timer(Engine& engine, Version version, int color) {
    process_group(engine, version, color);
}

void LeaderPipeline::process_group(Engine& engine, Version version, int color) {
    auto it = inflight_.find(version);
    if (it == inflight_.end()) throw ProtocolViolation("color group for unknown version");
    InFlight& fl = it->second;

    for (TxnId id : fl.batch) {
        if (fl.color_of.at(id) != color) continue;
        Transaction& txn = engine.txn_mut(id);

        bool ok = true;
        for (const auto& [shard, accs] : txn.accesses) {
            for (const auto& a : accs) {
                if (!a.min_balance) continue;
                if (fl.values.at({shard, a.account}) < *a.min_balance) ok = false;
            }
        }

        if (ok) {
            txn.status = TxnStatus::Precommitted;
            for (const auto& [shard, accs] : txn.accesses) {
                SubTxn sub;
                sub.parent = id;
                sub.shard = shard;
                sub.ops = accs;
                sub.color = color;
                for (const auto& a : accs) {
                    if (a.mode == AccessMode::Write) fl.values[{shard, a.account}] += a.delta;
                }
                fl.out_subtxns[shard].push_back(std::move(sub));
                fl.awaiting_commit[id].insert(shard);
            }
        } else {
            for (const auto& [shard, accs] : txn.accesses) {
                for (const auto& a : accs) fl.out_abort_releases[shard].insert(a.account);
            }
            engine.complete_txn(id, engine.now(), TxnStatus::Aborted);
            decrement_schedule_length(engine, version, id);
        }
    }

    fl.groups_processed += 1;
    if (fl.groups_processed == fl.lambda) {
        emit_precommit_batches(engine, version);
        maybe_retire(engine, version);
    }
}

void LeaderPipeline::emit_precommit_batches(Engine& engine, Version version) {
    InFlight& fl = inflight_.at(version);
    for (ShardId shard : fl.involved) {
        PrecommitBatchPayload payload;
        payload.cluster = cluster_;
        payload.version = version;
        auto subs = fl.out_subtxns.find(shard);
        if (subs != fl.out_subtxns.end()) payload.subtxns = subs->second;
        auto aborts = fl.out_abort_releases.find(shard);
        if (aborts != fl.out_abort_releases.end())
            payload.abort_releases.assign(aborts->second.begin(), aborts->second.end());
        engine.emit_message(MsgKind::SendPrecommitBatch, leader_shard_, shard, std::move(payload),
                            version);
    }
}

void LeaderPipeline::on_final_commit_response(Engine& engine,
                                              const FinalCommitResponsePayload& payload) {
    auto it = inflight_.find(payload.version);
    if (it == inflight_.end())
        throw ProtocolViolation("final_commit_response for a retired version");
    InFlight& fl = it->second;
    auto waiting = fl.awaiting_commit.find(payload.txn);
    if (waiting == fl.awaiting_commit.end() || !waiting->second.erase(payload.dest))
        throw ProtocolViolation("duplicate final_commit_response");
    Time& last = fl.last_append[payload.txn];
    last = std::max(last, payload.append_time);
    if (waiting->second.empty()) {
        fl.awaiting_commit.erase(waiting);
        engine.complete_txn(payload.txn, fl.last_append[payload.txn], TxnStatus::Committed);
        decrement_schedule_length(engine, payload.version, payload.txn);
        maybe_retire(engine, payload.version);
    }
}

int LeaderPipeline::weight_of(const Engine& engine, TxnId txn) const {
    if (!weight_by_subtxns_) return 1;
    return static_cast<int>(engine.txn(txn).accesses.size());
}

void LeaderPipeline::decrement_schedule_length(Engine& engine, Version version, TxnId txn) {
    if (version != latest_version_) return;  // stale batch: bookkeeping only
    last_event_sch_length_ = std::max(0, last_event_sch_length_ - weight_of(engine, txn));
    if (last_event_sch_length_ == 0 && !pq_.empty()) try_trigger(engine);
}

void LeaderPipeline::maybe_retire(Engine& engine, Version version) {
    auto it = inflight_.find(version);
    if (it == inflight_.end()) return;
    const InFlight& fl = it->second;
    if (!fl.states_complete || fl.groups_processed < fl.lambda || !fl.awaiting_commit.empty())
        return;
    inflight_.erase(it);
    if (inflight_.empty()) host_.on_pipeline_idle(engine, cluster_);
}

// ---------------------------------------------------------------------------
// DestinationShard

DestinationShard::DestinationShard(ShardId shard, int accounts_per_shard,
                                   std::int64_t initial_balance)
    : shard_(shard), values_(static_cast<std::size_t>(accounts_per_shard), initial_balance) {}

std::int64_t DestinationShard::balance(AccountId account) const {
    return values_.at(static_cast<std::size_t>(account));
}

OccupancyStats DestinationShard::occupancy_stats() const {
    OccupancyStats stats;
    stats.occupy_events = occupy_events_;
    stats.release_events = release_events_;
    stats.occupied_now = static_cast<std::int64_t>(occupied_.size());
    return stats;
}

void DestinationShard::on_account_state_request(Engine& engine, const Message& msg) {
    const auto& payload = std::get<AccountStateRequestPayload>(msg.payload);
    for (AccountId a : payload.accounts) {
        if (a < 0 || static_cast<std::size_t>(a) >= values_.size())
            throw ProtocolViolation("account state request outside this shard's partition");
    }
    PendingRequest request;
    request.seq = msg.seq;
    request.key = {payload.cluster, payload.version};
    request.reply_to = msg.src;
    request.accounts = payload.accounts;
    deferred_.push_back(std::move(request));
    scan(engine);
}

void DestinationShard::grant(Engine& engine, const PendingRequest& request) {
    AccountStateResponsePayload payload;
    payload.cluster = request.key.first;
    payload.version = request.key.second;
    payload.shard = shard_;
    for (AccountId a : request.accounts) {
        occupied_[a] = request.key;
        occupy_events_ += 1;
        payload.values.emplace_back(a, values_[static_cast<std::size_t>(a)]);
    }
    occupied_by_[request.key] = request.accounts;
    engine.emit_message(MsgKind::AccountStateResponse, shard_, request.reply_to,
                        std::move(payload), request.key.second);
}

void DestinationShard::scan(Engine& engine) {
    std::set<AccountId> claimed;
    std::vector<PendingRequest> still_blocked;
    still_blocked.reserve(deferred_.size());
    for (auto& request : deferred_) {
        bool free = true;
        for (AccountId a : request.accounts) {
            if (occupied_.count(a) || claimed.count(a)) {
                free = false;
                break;
            }
        }
        if (free) {
            grant(engine, request);
        } else {
            for (AccountId a : request.accounts) claimed.insert(a);
            still_blocked.push_back(std::move(request));
        }
    }
    deferred_ = std::move(still_blocked);
}

void DestinationShard::on_precommit_batch(Engine& engine, const Message& msg) {
    const auto& payload = std::get<PrecommitBatchPayload>(msg.payload);
    const BatchKey key{payload.cluster, payload.version};
    auto owned = occupied_by_.find(key);
    if (owned == occupied_by_.end())
        throw ProtocolViolation("precommit batch for a version with no occupancy here");
    auto is_owned = [&](AccountId a) {
        auto it = occupied_.find(a);
        return it != occupied_.end() && it->second == key;
    };
    for (const SubTxn& sub : payload.subtxns) {
        for (const auto& op : sub.ops) {
            if (!is_owned(op.account))
                throw ProtocolViolation("precommit batch touches an account not occupied by it");
        }
    }
    for (AccountId a : payload.abort_releases) {
        if (!is_owned(a))
            throw ProtocolViolation("abort notice for an account not occupied by this version");
    }

    StagedBatch staged;
    staged.key = key;
    staged.reply_to = msg.src;
    staged.subtxns = payload.subtxns;
    staged.abort_releases = payload.abort_releases;
    if (!staged_.emplace(key, std::move(staged)).second)
        throw ProtocolViolation("duplicate precommit batch for one version");

    Timer t;
    t.kind = TimerKind::ConsensusAppend;
    t.shard = shard_;
    t.cluster = payload.cluster;
    t.version = payload.version;
    engine.schedule_timer(engine.now() + 1, t);  // delta_cons: consensus on the batch order
}

void DestinationShard::on_consensus_timer(Engine& engine, const Timer& timer) {
    const BatchKey key{timer.cluster, timer.version};
    auto it = staged_.find(key);
    if (it == staged_.end()) throw ProtocolViolation("consensus timer without a staged batch");
    StagedBatch staged = std::move(it->second);
    staged_.erase(it);

    if (!staged.subtxns.empty()) {
        LedgerEntry entry;
        entry.time = engine.now();
        entry.cluster = key.first;
        entry.version = key.second;
        entry.subtxns = staged.subtxns;
        ledger_.push_back(std::move(entry));
        for (const SubTxn& sub : staged.subtxns) {
            for (const auto& op : sub.ops) {
                if (op.mode == AccessMode::Write)
                    values_[static_cast<std::size_t>(op.account)] += op.delta;
            }
        }
    }

    auto owned = occupied_by_.find(key);
    if (owned == occupied_by_.end())
        throw ProtocolViolation("consensus append without occupancy record");
    for (AccountId a : owned->second) {
        occupied_.erase(a);
        release_events_ += 1;
    }
    occupied_by_.erase(owned);

    for (const SubTxn& sub : staged.subtxns) {
        FinalCommitResponsePayload payload;
        payload.cluster = key.first;
        payload.version = key.second;
        payload.txn = sub.parent;
        payload.dest = shard_;
        payload.append_time = engine.now();
        engine.emit_message(MsgKind::FinalCommitResponse, shard_, staged.reply_to,
                            std::move(payload), key.second);
    }
    scan(engine);
}

// ---------------------------------------------------------------------------
// SingleLeaderScheduler

SingleLeaderScheduler::SingleLeaderScheduler(const ShardGraph& g, ShardId leader_shard,
                                             int accounts_per_shard, std::int64_t initial_balance,
                                             bool weight_by_subtxns)
    : leader_shard_(leader_shard),
      pipeline_(0, leader_shard, *this, weight_by_subtxns) {
    if (leader_shard < 0 || leader_shard >= g.shard_count)
        throw std::invalid_argument("leader shard out of range");
    destinations_.reserve(static_cast<std::size_t>(g.shard_count));
    for (ShardId shard = 0; shard < g.shard_count; ++shard)
        destinations_.emplace_back(shard, accounts_per_shard, initial_balance);
}

void SingleLeaderScheduler::on_inject(Engine& engine, const Transaction& txn) {
    TransactionSendPayload payload;
    payload.txn = txn.id;
    payload.cluster = 0;
    engine.emit_message(MsgKind::TransactionSend, txn.home, leader_shard_, payload);
}

void SingleLeaderScheduler::on_message(Engine& engine, const Message& msg) {
    switch (msg.kind) {
        case MsgKind::TransactionSend:
            pipeline_.on_transaction_send(engine, std::get<TransactionSendPayload>(msg.payload).txn);
            break;
        case MsgKind::AccountStateRequest:
            destinations_[static_cast<std::size_t>(msg.dst)].on_account_state_request(engine, msg);
            break;
        case MsgKind::AccountStateResponse:
            pipeline_.on_account_state_response(
                engine, std::get<AccountStateResponsePayload>(msg.payload));
            break;
        case MsgKind::SendPrecommitBatch:
            destinations_[static_cast<std::size_t>(msg.dst)].on_precommit_batch(engine, msg);
            break;
        case MsgKind::FinalCommitResponse:
            pipeline_.on_final_commit_response(engine,
                                               std::get<FinalCommitResponsePayload>(msg.payload));
            break;
        default:
            throw ProtocolViolation("schedule control message in single-leader mode");
    }
}

void SingleLeaderScheduler::on_timer(Engine& engine, const Timer& timer) {
    if (timer.kind == TimerKind::ProcessColorGroup) {
        pipeline_.on_color_timer(engine, timer.version, timer.color);
    } else {
        destinations_[static_cast<std::size_t>(timer.shard)].on_consensus_timer(engine, timer);
    }
}

std::vector<std::vector<LedgerEntry>> SingleLeaderScheduler::ledgers() const {
    std::vector<std::vector<LedgerEntry>> out;
    out.reserve(destinations_.size());
    for (const auto& d : destinations_) out.push_back(d.ledger());
    return out;
}

std::vector<OccupancyStats> SingleLeaderScheduler::occupancy() const {
    std::vector<OccupancyStats> out;
    out.reserve(destinations_.size());
    for (const auto& d : destinations_) out.push_back(d.occupancy_stats());
    return out;
}

}  // namespace shardsim
