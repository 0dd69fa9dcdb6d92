#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "shardsim/message.hpp"
#include "shardsim/metrics.hpp"
#include "shardsim/topology.hpp"
#include "shardsim/types.hpp"
#include "shardsim/workload.hpp"

namespace shardsim {

enum class DelayMode { Deterministic, UniformRandom };

DelayMode parse_delay_mode(const std::string& name);
std::string to_string(DelayMode mode);

/// Partial synchrony: messages emitted at or after GST are delivered within
/// frak_d; messages emitted earlier are held and delivered by gst + frak_d.
struct DelayModel {
    DelayMode mode = DelayMode::Deterministic;
    int frak_d = 2;      // >= delta_cons + 1
    int delta_cons = 1;  // intra-shard consensus, normalized to one unit
    Time gst = 0;
    std::uint64_t seed = 0;
    int per_hop = 1;  // deterministic mode: per-hop communication cost
};

class Engine;

/// Scheduler-side event handlers, driven by the engine in deterministic
/// (deliver_time, sequence) order.
class Protocol {
public:
    virtual ~Protocol() = default;
    virtual void on_inject(Engine& engine, const Transaction& txn) = 0;
    virtual void on_message(Engine& engine, const Message& msg) = 0;
    virtual void on_timer(Engine& engine, const Timer& timer) = 0;
    virtual void on_unit_end(Engine& engine, Time now) {}
};

/// Single-threaded discrete-event engine over integer time units. Fully
/// deterministic for a fixed (scenario, seed): delays are derived from a
/// counter-keyed hash and simultaneous deliveries dispatch in emit order.
class Engine {
public:
    Engine(const ShardGraph& graph, const DelayModel& delay, Protocol& protocol);

    void load_trace(const InjectionTrace& trace);

    /// Advances time units 0..until-1; returns the collected metrics.
    MetricsLog run(Time until);

    Time now() const { return now_; }
    const ShardGraph& graph() const { return graph_; }
    const DelayModel& delay_model() const { return delay_; }

    const Transaction& txn(TxnId id) const;
    Transaction& txn_mut(TxnId id);
    const std::map<TxnId, Transaction>& txns() const { return registry_; }

    /// Assigns deliver_time per the delay model (with per-channel FIFO order)
    /// and enqueues the message. Returns the assigned sequence number.
    std::uint64_t emit_message(MsgKind kind, ShardId src, ShardId dst, MessagePayload payload,
                               std::optional<Version> version = std::nullopt);

    void schedule_timer(Time at, Timer timer);

    /// Final status bookkeeping: records the per-transaction metrics row and
    /// removes the transaction from the pending counters.
    void complete_txn(TxnId id, Time done_time, TxnStatus status);

    /// Walks messages still in flight (delivery scheduled after now).
    void for_each_inflight_message(const std::function<void(const Message&)>& fn) const;

    void set_event_sink(std::ostream* sink) { event_sink_ = sink; }

private:
    struct QueueItem {
        Time at = 0;
        std::uint64_t seq = 0;
        std::variant<Message, Timer> body;
    };
    struct QueueOrder {
        bool operator()(const QueueItem& a, const QueueItem& b) const {
            return std::tie(a.at, a.seq) > std::tie(b.at, b.seq);
        }
    };

    Time compute_deliver_time(ShardId src, ShardId dst, Time emit, std::uint64_t seq) const;
    void dispatch(const QueueItem& item);

    const ShardGraph& graph_;
    DelayModel delay_;
    Protocol& protocol_;

    std::priority_queue<QueueItem, std::vector<QueueItem>, QueueOrder> queue_;
    std::uint64_t next_seq_ = 0;
    Time now_ = 0;

    std::vector<Transaction> pending_injections_;  // gen_time order
    std::size_t next_injection_ = 0;

    std::map<TxnId, Transaction> registry_;
    std::vector<Time> last_deliver_;  // per (src, dst) channel FIFO floor

    MetricsLog metrics_;
    std::int64_t combined_pending_ = 0;
    std::int64_t in_flight_ = 0;
    std::vector<int> per_shard_pending_;
    std::ostream* event_sink_ = nullptr;
};

}  // namespace shardsim
