#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace shardsim {

using ShardId = int;       // 0-based internally; printed 1-based (S1..Ss) in all file formats
using AccountId = int;     // local to a shard's account partition
using TxnId = std::int64_t;
using Time = std::int64_t;
using Version = std::int64_t;
using ClusterId = int;

enum class AccessMode { Read, Write };

/// One account touched by a transaction: optional balance precondition
/// (value >= min_balance) and an additive effect applied on commit.
struct AccountAccess {
    AccountId account = 0;
    AccessMode mode = AccessMode::Read;
    std::optional<std::int64_t> min_balance;
    std::int64_t delta = 0;  // nonzero only for writes

    bool operator==(const AccountAccess&) const = default;
};

enum class TxnStatus { Pending, Scheduled, Precommitted, Committed, Aborted };

inline const char* to_string(TxnStatus s) {
    switch (s) {
        case TxnStatus::Pending: return "pending";
        case TxnStatus::Scheduled: return "scheduled";
        case TxnStatus::Precommitted: return "precommitted";
        case TxnStatus::Committed: return "committed";
        case TxnStatus::Aborted: return "aborted";
    }
    return "?";
}

struct Transaction {
    TxnId id = 0;
    ShardId home = 0;
    std::map<ShardId, std::vector<AccountAccess>> accesses;  // destination shard -> accounts
    Time gen_time = 0;
    TxnStatus status = TxnStatus::Pending;
    std::optional<Time> commit_time;  // last ledger append (or abort decision)

    std::vector<ShardId> destination_shards() const {
        std::vector<ShardId> out;
        out.reserve(accesses.size());
        for (const auto& [shard, _] : accesses) out.push_back(shard);
        return out;
    }

    bool writes_account(ShardId shard, AccountId account) const {
        auto it = accesses.find(shard);
        if (it == accesses.end()) return false;
        for (const auto& a : it->second) {
            if (a.account == account && a.mode == AccessMode::Write) return true;
        }
        return false;
    }

    bool touches_account(ShardId shard, AccountId account) const {
        auto it = accesses.find(shard);
        if (it == accesses.end()) return false;
        for (const auto& a : it->second) {
            if (a.account == account) return true;
        }
        return false;
    }
};

/// Thrown when a handler observes a state that the protocol forbids.
/// Aborts the surrounding run; tests treat it as a failure signal.
class ProtocolViolation : public std::runtime_error {
public:
    explicit ProtocolViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shardsim
