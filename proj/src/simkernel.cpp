#include "shardsim/simkernel.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace shardsim {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

}  // namespace

const char* to_string(MsgKind kind) {
    switch (kind) {
        case MsgKind::TransactionSend: return "transaction_send";
        case MsgKind::AccountStateRequest: return "account_state_request";
        case MsgKind::AccountStateResponse: return "account_state_response";
        case MsgKind::SendPrecommitBatch: return "send_precommit_batch";
        case MsgKind::FinalCommitResponse: return "final_commit_response";
        case MsgKind::ScheduleControlRequest: return "schedule_control_request";
        case MsgKind::ScheduleControlResponse: return "schedule_control_response";
    }
    return "?";
}

DelayMode parse_delay_mode(const std::string& name) {
    if (name == "deterministic") return DelayMode::Deterministic;
    if (name == "uniform-random") return DelayMode::UniformRandom;
    throw std::invalid_argument("unknown delay mode: " + name);
}

std::string to_string(DelayMode mode) {
    return mode == DelayMode::Deterministic ? "deterministic" : "uniform-random";
}

Engine::Engine(const ShardGraph& graph, const DelayModel& delay, Protocol& protocol)
    : graph_(graph), delay_(delay), protocol_(protocol) {
    if (delay_.frak_d < delay_.delta_cons + 1)
        throw std::invalid_argument("frak_d must be at least delta_cons + 1");
    if (delay_.gst < 0) throw std::invalid_argument("gst must be >= 0");
    last_deliver_.assign(static_cast<std::size_t>(graph_.shard_count) *
                             static_cast<std::size_t>(graph_.shard_count),
                         0);
    per_shard_pending_.assign(static_cast<std::size_t>(graph_.shard_count), 0);
}

void Engine::load_trace(const InjectionTrace& trace) {
    pending_injections_ = trace.txns;
    std::stable_sort(pending_injections_.begin(), pending_injections_.end(),
                     [](const Transaction& a, const Transaction& b) {
                         return std::tie(a.gen_time, a.id) < std::tie(b.gen_time, b.id);
                     });
    next_injection_ = 0;
}

const Transaction& Engine::txn(TxnId id) const {
    auto it = registry_.find(id);
    if (it == registry_.end()) throw std::out_of_range("unknown transaction id");
    return it->second;
}

Transaction& Engine::txn_mut(TxnId id) {
    auto it = registry_.find(id);
    if (it == registry_.end()) throw std::out_of_range("unknown transaction id");
    return it->second;
}

Time Engine::compute_deliver_time(ShardId src, ShardId dst, Time emit, std::uint64_t seq) const {
    const Time base = std::max(emit, delay_.gst);
    Time delay = 0;
    if (delay_.mode == DelayMode::Deterministic) {
        const int hops = graph_.dist[static_cast<std::size_t>(src)][static_cast<std::size_t>(dst)];
        delay = std::min<Time>(delay_.frak_d, delay_.delta_cons + static_cast<Time>(hops) * delay_.per_hop);
    } else {
        const std::uint64_t span = static_cast<std::uint64_t>(delay_.frak_d - delay_.delta_cons);
        const std::uint64_t draw = mix64(delay_.seed ^ mix64(seq + 0x9e3779b97f4a7c15ULL)) % span;
        delay = delay_.delta_cons + 1 + static_cast<Time>(draw);
    }
    return base + delay;
}

std::uint64_t Engine::emit_message(MsgKind kind, ShardId src, ShardId dst, MessagePayload payload,
                                   std::optional<Version> version) {
    Message msg;
    msg.kind = kind;
    msg.src = src;
    msg.dst = dst;
    msg.emit_time = now_;
    msg.seq = next_seq_++;
    msg.version = version;
    msg.payload = std::move(payload);
    msg.deliver_time = compute_deliver_time(src, dst, now_, msg.seq);

    // Per-channel FIFO: cluster sending runs consensus per message, so a
    // later message never overtakes an earlier one on the same channel.
    Time& floor = last_deliver_[static_cast<std::size_t>(src) *
                                   static_cast<std::size_t>(graph_.shard_count) +
                               static_cast<std::size_t>(dst)];
    msg.deliver_time = std::max(msg.deliver_time, floor);
    floor = msg.deliver_time;

    metrics_.emitted_messages += 1;
    in_flight_ += 1;
    queue_.push(QueueItem{msg.deliver_time, msg.seq, std::move(msg)});
    return next_seq_ - 1;
}

void Engine::schedule_timer(Time at, Timer timer) {
    if (at <= now_) throw std::logic_error("timer must be scheduled in the future");
    timer.seq = next_seq_++;
    queue_.push(QueueItem{at, timer.seq, timer});
}

void Engine::complete_txn(TxnId id, Time done_time, TxnStatus status) {
    Transaction& t = txn_mut(id);
    if (t.status == TxnStatus::Committed || t.status == TxnStatus::Aborted)
        throw ProtocolViolation("transaction completed twice: " + std::to_string(id));
    t.status = status;
    t.commit_time = done_time;
    combined_pending_ -= 1;
    for (const auto& [shard, _] : t.accesses) per_shard_pending_[static_cast<std::size_t>(shard)] -= 1;
    PerTxnRow row;
    row.id = id;
    row.gen = t.gen_time;
    row.done = done_time;
    row.latency = done_time - t.gen_time;
    row.status = status;
    metrics_.per_txn.push_back(row);
    metrics_.max_latency = std::max(metrics_.max_latency, row.latency);
    if (status == TxnStatus::Committed) metrics_.committed += 1;
    if (status == TxnStatus::Aborted) metrics_.aborted += 1;
}

void Engine::for_each_inflight_message(const std::function<void(const Message&)>& fn) const {
    // std::priority_queue hides its container; copy-and-drain stays cheap at
    // the queue sizes these runs reach and keeps the engine interface small.
    auto copy = queue_;
    while (!copy.empty()) {
        const auto& item = copy.top();
        if (const auto* msg = std::get_if<Message>(&item.body)) fn(*msg);
        copy.pop();
    }
}

void Engine::dispatch(const QueueItem& item) {
    if (const auto* msg = std::get_if<Message>(&item.body)) {
        // Partial-synchrony delivery bound, asserted on every delivery.
        const Time limit = std::max(msg->emit_time, delay_.gst) + delay_.frak_d;
        if (msg->deliver_time > limit)
            throw ProtocolViolation("message delivered past the frak_d bound");
        if (msg->deliver_time < msg->emit_time + 1)
            throw ProtocolViolation("message delivered before emit_time + 1");
        metrics_.delivered_messages += 1;
        in_flight_ -= 1;
        if (event_sink_) {
            *event_sink_ << now_ << ' ' << to_string(msg->kind) << ' ' << (msg->src + 1) << ' '
                         << (msg->dst + 1) << ' ' << (msg->version ? *msg->version : 0);
            if (const auto* send = std::get_if<TransactionSendPayload>(&msg->payload))
                *event_sink_ << ' ' << send->txn;
            *event_sink_ << '\n';
        }
        protocol_.on_message(*this, *msg);
    } else {
        protocol_.on_timer(*this, std::get<Timer>(item.body));
    }
}

MetricsLog Engine::run(Time until) {
    metrics_.per_unit.reserve(static_cast<std::size_t>(until));
    for (now_ = 0; now_ < until; ++now_) {
        while (next_injection_ < pending_injections_.size() &&
               pending_injections_[next_injection_].gen_time == now_) {
            const Transaction& t = pending_injections_[next_injection_];
            auto [it, fresh] = registry_.emplace(t.id, t);
            if (!fresh) throw ProtocolViolation("duplicate transaction id in trace");
            combined_pending_ += 1;
            metrics_.injected += 1;
            for (const auto& [shard, _] : t.accesses)
                per_shard_pending_[static_cast<std::size_t>(shard)] += 1;
            protocol_.on_inject(*this, it->second);
            ++next_injection_;
        }
        if (next_injection_ < pending_injections_.size() &&
            pending_injections_[next_injection_].gen_time < now_)
            throw std::logic_error("trace not sorted by gen_time");

        while (!queue_.empty() && queue_.top().at == now_) {
            QueueItem item = queue_.top();
            queue_.pop();
            dispatch(item);
        }
        if (!queue_.empty() && queue_.top().at < now_)
            throw std::logic_error("event scheduled in the past");

        PerUnitRow row;
        row.time = now_;
        row.combined_pending = combined_pending_;
        row.messages_in_flight = in_flight_;
        metrics_.per_unit.push_back(row);
        metrics_.per_shard_pending.push_back(per_shard_pending_);
        metrics_.max_combined_pending = std::max(metrics_.max_combined_pending, combined_pending_);
        protocol_.on_unit_end(*this, now_);
    }

    metrics_.undelivered_at_end = in_flight_;
    for (const auto& [id, t] : registry_) {
        if (t.status != TxnStatus::Committed && t.status != TxnStatus::Aborted)
            metrics_.unfinished.emplace_back(id, t.gen_time);
    }
    return metrics_;
}

}  // namespace shardsim
