#include "shardsim/workload.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace shardsim {

namespace {

// splitmix64; portable bounded draws, unlike std::uniform_int_distribution.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
    bool chance(const Rational& p) {
        return static_cast<std::int64_t>(below(static_cast<std::uint64_t>(p.den()))) < p.num();
    }
};

class Buckets {
public:
    Buckets(int shards, int b, const Rational& rho, bool enforce)
        : q_(rho.den()), p_(rho.num()), cap_(static_cast<std::int64_t>(b) * rho.den()),
          level_(static_cast<std::size_t>(shards), static_cast<std::int64_t>(b) * rho.den()),
          enforce_(enforce) {}

    void refill() {
        if (!enforce_) return;
        for (auto& l : level_) l = std::min(cap_, l + p_);
    }

    bool try_spend(const std::vector<ShardId>& shards) {
        if (!enforce_) return true;
        for (ShardId s : shards) {
            if (level_[static_cast<std::size_t>(s)] < q_) return false;
        }
        for (ShardId s : shards) level_[static_cast<std::size_t>(s)] -= q_;
        return true;
    }

    bool has_token(ShardId s) const {
        return !enforce_ || level_[static_cast<std::size_t>(s)] >= q_;
    }

    std::int64_t refill_period() const { return p_ == 0 ? 1 : (cap_ + p_ - 1) / p_; }

private:
    std::int64_t q_;
    std::int64_t p_;
    std::int64_t cap_;
    std::vector<std::int64_t> level_;
    bool enforce_;
};

struct Candidate {
    ShardId home = 0;
    std::map<ShardId, std::vector<AccountAccess>> accesses;

    std::vector<ShardId> shards() const {
        std::vector<ShardId> out;
        for (const auto& [s, _] : accesses) out.push_back(s);
        return out;
    }
};

class CandidateMaker {
public:
    CandidateMaker(const WorkloadParams& params, int shard_count, Rng& rng)
        : params_(params), s_(shard_count), rng_(rng) {}

    AccountAccess make_access(bool force_write, AccountId forced_account = -1) {
        AccountAccess a;
        a.account = forced_account >= 0
                        ? forced_account
                        : static_cast<AccountId>(rng_.below(
                              static_cast<std::uint64_t>(params_.accounts_per_shard)));
        bool write = force_write || rng_.chance(params_.write_fraction);
        if (write) {
            a.mode = AccessMode::Write;
            std::int64_t mag = 1 + static_cast<std::int64_t>(rng_.below(8));
            if (rng_.below(2) == 0) {
                a.delta = -mag;
                a.min_balance = mag;  // banking style: check covers the deduction
            } else {
                a.delta = mag;
            }
        } else {
            a.mode = AccessMode::Read;
            if (rng_.below(4) == 0) {
                a.min_balance = static_cast<std::int64_t>(
                    rng_.below(static_cast<std::uint64_t>(params_.initial_balance)));
            }
        }
        // Occasionally demand more than balances can reach, to exercise aborts.
        if (rng_.below(16) == 0) a.min_balance = params_.initial_balance * 4;
        return a;
    }

    Candidate cross_shard(bool hotspot) {
        Candidate c;
        c.home = static_cast<ShardId>(rng_.below(static_cast<std::uint64_t>(s_)));
        int n = 1 + static_cast<int>(rng_.below(static_cast<std::uint64_t>(
                        std::min(params_.max_shards_per_txn, s_))));
        std::set<ShardId> dests;
        while (static_cast<int>(dests.size()) < n) {
            ShardId d;
            if (hotspot && rng_.below(4) < 3) {
                d = static_cast<ShardId>(rng_.below(static_cast<std::uint64_t>(std::min(2, s_))));
            } else {
                d = static_cast<ShardId>(rng_.below(static_cast<std::uint64_t>(s_)));
            }
            dests.insert(d);
        }
        for (ShardId d : dests) {
            c.accesses[d].push_back(make_access(false));
            if (rng_.below(4) == 0 && params_.accounts_per_shard > 1) {
                AccountAccess extra = make_access(false);
                if (extra.account == c.accesses[d].front().account)
                    extra.account = (extra.account + 1) % params_.accounts_per_shard;
                c.accesses[d].push_back(extra);
            }
        }
        return c;
    }

    Candidate intra_shard(ShardId home) {
        Candidate c;
        c.home = home;
        c.accesses[home].push_back(make_access(false));
        return c;
    }

    Candidate victim_write(ShardId victim) {
        // Single hot account on the victim: every pair of these conflicts.
        Candidate c;
        c.home = static_cast<ShardId>(rng_.below(static_cast<std::uint64_t>(s_)));
        c.accesses[victim].push_back(make_access(true, 0));
        return c;
    }

private:
    const WorkloadParams& params_;
    int s_;
    Rng& rng_;
};

}  // namespace

InjectionPattern parse_pattern(const std::string& name) {
    if (name == "uniform") return InjectionPattern::Uniform;
    if (name == "bursty") return InjectionPattern::Bursty;
    if (name == "hotspot") return InjectionPattern::Hotspot;
    if (name == "dos") return InjectionPattern::Dos;
    throw std::invalid_argument("unknown injection pattern: " + name);
}

std::string to_string(InjectionPattern p) {
    switch (p) {
        case InjectionPattern::Uniform: return "uniform";
        case InjectionPattern::Bursty: return "bursty";
        case InjectionPattern::Hotspot: return "hotspot";
        case InjectionPattern::Dos: return "dos";
    }
    return "?";
}

InjectionTrace generate_trace(const ShardGraph& g, const WorkloadParams& params) {
    if (params.rho <= Rational(0) || params.rho > Rational(1))
        throw std::invalid_argument("rho must satisfy 0 < rho <= 1");
    if (params.burstiness < 1) throw std::invalid_argument("burstiness must be >= 1");
    if (params.max_shards_per_txn < 1 || params.max_shards_per_txn > g.shard_count)
        throw std::invalid_argument("k must satisfy 1 <= k <= s");
    if (params.accounts_per_shard < 1)
        throw std::invalid_argument("accounts_per_shard must be >= 1");

    const int s = g.shard_count;
    Rng rng(params.seed ^ 0x5bd1e995u);
    CandidateMaker maker(params, s, rng);
    Buckets buckets(s, params.burstiness, params.rho, params.enforce_admissibility);

    InjectionTrace trace;
    trace.rho = params.rho;
    trace.burstiness = params.burstiness;
    trace.horizon = params.horizon;

    TxnId next_id = 1;
    auto emit = [&](Candidate&& c, Time t) {
        Transaction txn;
        txn.id = next_id++;
        txn.home = c.home;
        txn.accesses = std::move(c.accesses);
        txn.gen_time = t;
        trace.txns.push_back(std::move(txn));
    };

    // Candidate arrivals per unit for the spread-out patterns: rho * s on
    // average, carried by an exact fractional accumulator.
    Rational acc(0);
    const Rational per_unit = params.rho * Rational(s);
    const std::int64_t burst_period = buckets.refill_period();

    for (Time t = 0; t < params.horizon; ++t) {
        if (t > 0) buckets.refill();
        switch (params.pattern) {
            case InjectionPattern::Uniform:
            case InjectionPattern::Hotspot: {
                acc = acc + per_unit;
                std::int64_t attempts = acc.floor();
                acc = acc - Rational(attempts);
                if (t == 0) attempts = std::max<std::int64_t>(attempts, 1);
                for (std::int64_t i = 0; i < attempts; ++i) {
                    Candidate c = maker.cross_shard(params.pattern == InjectionPattern::Hotspot);
                    if (buckets.try_spend(c.shards())) emit(std::move(c), t);
                }
                break;
            }
            case InjectionPattern::Bursty: {
                // b-sized bursts at every bucket refill point, then silence.
                if (t % burst_period != 0) break;
                for (ShardId home = 0; home < s; ++home) {
                    for (int i = 0; i < params.burstiness; ++i) {
                        Candidate c = maker.intra_shard(home);
                        if (!buckets.try_spend(c.shards())) break;
                        emit(std::move(c), t);
                    }
                }
                break;
            }
            case InjectionPattern::Dos: {
                const ShardId victim = 0;
                if (params.enforce_admissibility) {
                    while (buckets.has_token(victim)) {
                        Candidate c = maker.victim_write(victim);
                        if (!buckets.try_spend(c.shards())) break;
                        emit(std::move(c), t);
                    }
                } else {
                    for (int i = 0; i < params.burstiness; ++i)
                        emit(maker.victim_write(victim), t);
                }
                break;
            }
        }
    }
    return trace;
}

namespace {

std::vector<std::int64_t> per_shard_prefix(const InjectionTrace& trace, ShardId shard,
                                           Time units) {
    std::vector<std::int64_t> prefix(static_cast<std::size_t>(units) + 1, 0);
    for (const auto& txn : trace.txns) {
        if (txn.gen_time < 0 || txn.gen_time >= units) continue;
        if (txn.accesses.count(shard)) prefix[static_cast<std::size_t>(txn.gen_time) + 1] += 1;
    }
    for (std::size_t i = 1; i < prefix.size(); ++i) prefix[i] += prefix[i - 1];
    return prefix;
}

Time trace_units(const InjectionTrace& trace) {
    Time units = trace.horizon;
    for (const auto& txn : trace.txns) units = std::max(units, txn.gen_time + 1);
    return units;
}

int trace_shard_count(const InjectionTrace& trace) {
    int s = 0;
    for (const auto& txn : trace.txns) {
        s = std::max(s, txn.home + 1);
        for (const auto& [shard, _] : txn.accesses) s = std::max(s, shard + 1);
    }
    return s;
}

}  // namespace

AdmissibilityVerdict check_admissibility(const InjectionTrace& trace, const Rational& rho,
                                         int burstiness) {
    const Time units = trace_units(trace);
    const int s = trace_shard_count(trace);
    const std::int64_t p = rho.num();
    const std::int64_t q = rho.den();
    const std::int64_t bq = static_cast<std::int64_t>(burstiness) * q;
    for (ShardId shard = 0; shard < s; ++shard) {
        auto prefix = per_shard_prefix(trace, shard, units);
        for (Time t1 = 0; t1 + 1 < units; ++t1) {
            for (Time t2 = t1 + 1; t2 < units; ++t2) {
                std::int64_t count = prefix[static_cast<std::size_t>(t2) + 1] -
                                     prefix[static_cast<std::size_t>(t1)];
                if (count * q > p * (t2 - t1) + bq) {
                    return {false, AdmissibilityViolation{shard, t1, t2, count}};
                }
            }
        }
    }
    return {true, std::nullopt};
}

AdmissibilityVerdict check_admissibility_fast(const InjectionTrace& trace, const Rational& rho,
                                              int burstiness) {
    const Time units = trace_units(trace);
    const int s = trace_shard_count(trace);
    const std::int64_t p = rho.num();
    const std::int64_t q = rho.den();
    const std::int64_t bq = static_cast<std::int64_t>(burstiness) * q;
    for (ShardId shard = 0; shard < s; ++shard) {
        auto prefix = per_shard_prefix(trace, shard, units);
        // Window [t1,t2] violates iff q*P[t2+1] - p*t2 - bq > q*P[t1] - p*t1.
        std::int64_t best_t1 = 0;
        std::int64_t best_val = 0;  // value at t1 = 0
        for (Time t2 = 1; t2 < units; ++t2) {
            std::int64_t cand = q * prefix[static_cast<std::size_t>(t2 - 1)] - p * (t2 - 1);
            if (cand < best_val) {
                best_val = cand;
                best_t1 = t2 - 1;
            }
            std::int64_t lhs = q * prefix[static_cast<std::size_t>(t2) + 1] - p * t2 - bq;
            if (lhs > best_val) {
                std::int64_t count = prefix[static_cast<std::size_t>(t2) + 1] -
                                     prefix[static_cast<std::size_t>(best_t1)];
                return {false, AdmissibilityViolation{shard, best_t1, t2, count}};
            }
        }
    }
    return {true, std::nullopt};
}

void write_trace(std::ostream& out, const InjectionTrace& trace) {
    for (const auto& txn : trace.txns) {
        out << txn.id << ' ' << txn.gen_time << ' ' << (txn.home + 1) << ' ';
        bool first = true;
        for (const auto& [shard, accs] : txn.accesses) {
            for (const auto& a : accs) {
                if (!first) out << ',';
                first = false;
                out << (shard + 1) << ':' << a.account << ':'
                    << (a.mode == AccessMode::Write ? 'w' : 'r');
            }
        }
        out << '\n';
    }
}

InjectionTrace read_trace(std::istream& in, const Rational& rho, int burstiness, Time horizon) {
    InjectionTrace trace;
    trace.rho = rho;
    trace.burstiness = burstiness;
    trace.horizon = horizon;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Transaction txn;
        int home_1based = 0;
        std::string accesses;
        if (!(ls >> txn.id >> txn.gen_time >> home_1based >> accesses))
            throw std::invalid_argument("trace parse error at line " + std::to_string(line_no));
        txn.home = home_1based - 1;
        std::istringstream as(accesses);
        std::string item;
        while (std::getline(as, item, ',')) {
            std::istringstream is(item);
            std::string shard_s, account_s, mode_s;
            if (!std::getline(is, shard_s, ':') || !std::getline(is, account_s, ':') ||
                !std::getline(is, mode_s))
                throw std::invalid_argument("trace access parse error at line " +
                                            std::to_string(line_no));
            AccountAccess a;
            a.account = std::stoi(account_s);
            a.mode = mode_s == "w" ? AccessMode::Write : AccessMode::Read;
            txn.accesses[std::stoi(shard_s) - 1].push_back(a);
        }
        if (txn.accesses.empty())
            throw std::invalid_argument("transaction with no accesses at line " +
                                        std::to_string(line_no));
        trace.txns.push_back(std::move(txn));
    }
    std::stable_sort(trace.txns.begin(), trace.txns.end(),
                     [](const Transaction& a, const Transaction& b) {
                         return std::tie(a.gen_time, a.id) < std::tie(b.gen_time, b.id);
                     });
    return trace;
}

}  // namespace shardsim
