#include "shardsim/metrics.hpp"

#include <algorithm>
#include <sstream>

#include "shardsim/conflict.hpp"

namespace shardsim {

namespace {

int ceil_sqrt(int n) {
    int r = 0;
    while (r * r < n) ++r;
    return r;
}

int floor_sqrt(std::int64_t n) {
    std::int64_t r = 0;
    while ((r + 1) * (r + 1) <= n) ++r;
    return static_cast<int>(r);
}

}  // namespace

BoundSet compute_bounds(const BoundParams& p) {
    if (p.shard_count < 1 || p.max_shards_per_txn < 1 || p.burstiness < 1 || p.frak_d < 2)
        throw std::invalid_argument("bound parameters must be positive (frak_d >= 2)");
    if (p.mode == SchedulerMode::Multi && p.measured_lm < 1)
        throw std::invalid_argument("multi-leader bounds need the measured L*M");

    const std::int64_t s = p.shard_count;
    const std::int64_t k = p.max_shards_per_txn;
    const std::int64_t b = p.burstiness;
    const std::int64_t d = p.frak_d;
    const std::int64_t rs = ceil_sqrt(p.shard_count);
    const std::int64_t min_ks = std::min(k, rs);
    const std::int64_t lm = p.mode == SchedulerMode::Multi ? p.measured_lm : 1;

    BoundSet out;
    out.mode = p.mode;
    out.cover_factor = lm;
    out.tau = Rational(16 * b * lm * min_ks + 48 * lm * d);
    out.rho_limit = max(Rational(1, 16 * lm * k), Rational(1, 16 * lm * rs));
    out.zeta = (Rational(2 * b) + p.rho * Rational(48 * lm * d)) * Rational(s);
    out.queue_bound = out.zeta * Rational(2);
    out.latency_bound = out.tau * Rational(2);
    out.reference_optimum = max(Rational(2, k + 1), Rational(2, floor_sqrt(2 * s)));
    return out;
}

VerdictReport check_run(const MetricsLog& log, const BoundSet& bounds, Time horizon) {
    VerdictReport report;
    report.observed_max_pending = log.max_combined_pending;
    report.observed_max_latency = log.max_latency;
    report.queue_ok = Rational(log.max_combined_pending) <= bounds.queue_bound;
    report.latency_ok = Rational(log.max_latency) <= bounds.latency_bound;
    for (const auto& [id, gen] : log.unfinished) {
        if (Rational(horizon - gen) > bounds.latency_bound) {
            report.liveness_ok = false;
        } else {
            report.excluded_unfinished += 1;
        }
    }
    if (bounds.queue_bound > Rational(0))
        report.queue_margin = Rational(log.max_combined_pending) / bounds.queue_bound;
    if (bounds.latency_bound > Rational(0))
        report.latency_margin = Rational(log.max_latency) / bounds.latency_bound;
    return report;
}

namespace {

struct LedgerPosition {
    std::size_t entry = 0;
    std::size_t sub = 0;
    auto operator<=>(const LedgerPosition&) const = default;
};

}  // namespace

RunValidation validate_run(const std::map<TxnId, Transaction>& txns,
                           const std::vector<std::vector<LedgerEntry>>& ledgers,
                           const std::vector<OccupancyStats>& occupancy) {
    RunValidation v;
    const int s = static_cast<int>(ledgers.size());

    // Per-shard first-appearance positions, duplicate detection included.
    std::vector<std::map<TxnId, LedgerPosition>> pos(ledgers.size());
    std::vector<std::map<TxnId, int>> appearances(ledgers.size());
    for (int shard = 0; shard < s; ++shard) {
        for (std::size_t e = 0; e < ledgers[static_cast<std::size_t>(shard)].size(); ++e) {
            const auto& entry = ledgers[static_cast<std::size_t>(shard)][e];
            int last_color = -1;
            for (std::size_t i = 0; i < entry.subtxns.size(); ++i) {
                const SubTxn& sub = entry.subtxns[i];
                appearances[static_cast<std::size_t>(shard)][sub.parent] += 1;
                pos[static_cast<std::size_t>(shard)].emplace(sub.parent, LedgerPosition{e, i});
                if (sub.color < last_color) {
                    v.color_discipline = false;
                    v.detail = "ledger batch violates ascending color order";
                }
                last_color = std::max(last_color, sub.color);
            }
        }
    }

    // Atomicity: committed exactly once per destination, aborted nowhere.
    for (const auto& [id, txn] : txns) {
        if (txn.status == TxnStatus::Committed) {
            for (const auto& [shard, _] : txn.accesses) {
                auto& app = appearances[static_cast<std::size_t>(shard)];
                auto it = app.find(id);
                if (it == app.end() || it->second != 1) {
                    v.atomic = false;
                    v.detail = "committed txn " + std::to_string(id) +
                               " does not appear exactly once on shard " + std::to_string(shard + 1);
                }
            }
        } else if (txn.status == TxnStatus::Aborted) {
            for (int shard = 0; shard < s; ++shard) {
                if (appearances[static_cast<std::size_t>(shard)].count(id)) {
                    v.atomic = false;
                    v.detail = "aborted txn " + std::to_string(id) + " appears on shard " +
                               std::to_string(shard + 1);
                }
            }
        }
    }

    // Same-color subtransactions of one batch must come from non-conflicting
    // transactions; collect (cluster, version) -> txn -> color from ledgers.
    std::map<std::pair<ClusterId, Version>, std::map<TxnId, int>> batch_colors;
    for (int shard = 0; shard < s; ++shard) {
        for (const auto& entry : ledgers[static_cast<std::size_t>(shard)]) {
            auto& colors = batch_colors[{entry.cluster, entry.version}];
            for (const SubTxn& sub : entry.subtxns) {
                auto [it, fresh] = colors.emplace(sub.parent, sub.color);
                if (!fresh && it->second != sub.color) {
                    v.color_discipline = false;
                    v.detail = "txn " + std::to_string(sub.parent) + " has two colors in one batch";
                }
            }
        }
    }
    for (const auto& [key, colors] : batch_colors) {
        for (auto a = colors.begin(); a != colors.end(); ++a) {
            for (auto b = std::next(a); b != colors.end(); ++b) {
                if (a->second != b->second) continue;
                if (conflicts(txns.at(a->first), txns.at(b->first))) {
                    v.color_discipline = false;
                    v.detail = "conflicting txns " + std::to_string(a->first) + " and " +
                               std::to_string(b->first) + " share a color";
                }
            }
        }
    }

    // Serializability: every shard holding subtransactions of a conflicting
    // committed pair orders them identically.
    std::vector<const Transaction*> committed;
    for (const auto& [id, txn] : txns)
        if (txn.status == TxnStatus::Committed) committed.push_back(&txn);
    for (std::size_t i = 0; i < committed.size() && v.serializable; ++i) {
        for (std::size_t j = i + 1; j < committed.size(); ++j) {
            if (!conflicts(*committed[i], *committed[j])) continue;
            int order = 0;  // 0 unknown, 1 means i before j, -1 means j before i
            for (int shard = 0; shard < s; ++shard) {
                const auto& p = pos[static_cast<std::size_t>(shard)];
                auto ia = p.find(committed[i]->id);
                auto ib = p.find(committed[j]->id);
                if (ia == p.end() || ib == p.end()) continue;
                int here = ia->second < ib->second ? 1 : -1;
                if (order == 0) {
                    order = here;
                } else if (order != here) {
                    v.serializable = false;
                    v.detail = "txns " + std::to_string(committed[i]->id) + " and " +
                               std::to_string(committed[j]->id) + " are ordered differently across shards";
                    break;
                }
            }
        }
    }

    for (std::size_t shard = 0; shard < occupancy.size(); ++shard) {
        const auto& o = occupancy[shard];
        if (o.occupy_events - o.release_events != o.occupied_now) {
            v.occupancy_balanced = false;
            v.detail = "occupancy events unbalanced on shard " + std::to_string(shard + 1);
        }
    }
    return v;
}

std::string per_unit_csv(const MetricsLog& log) {
    std::ostringstream out;
    out << "time,combined_pending,messages_in_flight\n";
    for (const auto& row : log.per_unit)
        out << row.time << ',' << row.combined_pending << ',' << row.messages_in_flight << '\n';
    return out.str();
}

std::string per_txn_csv(const MetricsLog& log) {
    std::ostringstream out;
    out << "txn_id,gen,done,latency,status\n";
    for (const auto& row : log.per_txn)
        out << row.id << ',' << row.gen << ',' << row.done << ',' << row.latency << ','
            << to_string(row.status) << '\n';
    return out.str();
}

}  // namespace shardsim
