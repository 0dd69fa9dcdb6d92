#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "shardsim/types.hpp"

namespace shardsim {

enum class MsgKind {
    TransactionSend,
    AccountStateRequest,
    AccountStateResponse,
    SendPrecommitBatch,
    FinalCommitResponse,
    ScheduleControlRequest,
    ScheduleControlResponse,
};

const char* to_string(MsgKind kind);

/// Per-shard slice of a transaction, appended to that shard's ledger.
struct SubTxn {
    TxnId parent = 0;
    ShardId shard = 0;
    std::vector<AccountAccess> ops;
    int color = 0;  // color group of the parent in the frozen conflict graph
};

struct LedgerEntry {
    Time time = 0;
    ClusterId cluster = 0;
    Version version = 0;
    std::vector<SubTxn> subtxns;  // commit order within the batch
};

struct TransactionSendPayload {
    TxnId txn = 0;
    ClusterId cluster = 0;  // scheduling pipeline the leader shard runs for this txn
};

struct AccountStateRequestPayload {
    ClusterId cluster = 0;
    Version version = 0;
    std::vector<AccountId> accounts;  // sorted, owned by the destination shard
};

struct AccountStateResponsePayload {
    ClusterId cluster = 0;
    Version version = 0;
    ShardId shard = 0;  // responding destination
    std::vector<std::pair<AccountId, std::int64_t>> values;
};

struct PrecommitBatchPayload {
    ClusterId cluster = 0;
    Version version = 0;
    std::vector<SubTxn> subtxns;                // ascending color order
    std::vector<AccountId> abort_releases;      // occupied accounts of aborted txns
};

struct FinalCommitResponsePayload {
    ClusterId cluster = 0;
    Version version = 0;
    TxnId txn = 0;
    ShardId dest = 0;
    Time append_time = 0;
};

struct ControlPayload {
    ClusterId from_cluster = 0;
    ClusterId to_cluster = 0;
    std::vector<ShardId> shards;
};

using MessagePayload =
    std::variant<TransactionSendPayload, AccountStateRequestPayload, AccountStateResponsePayload,
                 PrecommitBatchPayload, FinalCommitResponsePayload, ControlPayload>;

struct Message {
    MsgKind kind = MsgKind::TransactionSend;
    ShardId src = 0;
    ShardId dst = 0;
    Time emit_time = 0;
    Time deliver_time = 0;
    std::optional<Version> version;
    std::uint64_t seq = 0;  // global emit order; ties at one deliver_time dispatch in seq order
    MessagePayload payload;
};

enum class TimerKind { ProcessColorGroup, ConsensusAppend };

/// Engine-local deferred action at a shard; not a protocol message and not
/// counted in messages_in_flight.
struct Timer {
    TimerKind kind = TimerKind::ProcessColorGroup;
    ShardId shard = 0;
    ClusterId cluster = 0;
    Version version = 0;
    int color = 0;
    std::uint64_t seq = 0;
};

}  // namespace shardsim
