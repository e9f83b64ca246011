#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "ville/construction.hpp"
#include "ville/family.hpp"

namespace ville {

enum class CheckStatus : std::uint8_t { Pass, Fail, Inconclusive };

struct CheckResult {
    CheckStatus status = CheckStatus::Pass;
    std::string detail;
    std::uint64_t violation_at = 0; // first offending stage/coordinate when failed

    bool passed() const { return status == CheckStatus::Pass; }
    bool failed() const { return status == CheckStatus::Fail; }
    static CheckResult pass(std::string d = {}) { return {CheckStatus::Pass, std::move(d), 0}; }
    static CheckResult fail(std::string d, std::uint64_t at = 0) { return {CheckStatus::Fail, std::move(d), at}; }
    static CheckResult inconclusive(std::string d) { return {CheckStatus::Inconclusive, std::move(d), 0}; }
};

inline const char* to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

/// Running sums: result[i] = number of 1s among the first i bits, so in stage
/// terms S(q[n]) = result[n-1]. Size is q.size() + 1.
inline std::vector<std::uint64_t> running_sums(const BitVec& q) {
    std::vector<std::uint64_t> sums(q.size() + 1, 0);
    for (std::uint64_t i = 0; i < q.size(); ++i) sums[i + 1] = sums[i] + std::uint64_t(q[i]);
    return sums;
}

/// The running-sum bound: in every prefix the 1s never outnumber the 0s
/// (every 1 is pair-matched to an earlier 0), which gives S(q[n])/n <= 1/2
/// for all n. Integer arithmetic only; reports the first violating n.
inline CheckResult verify_half_bound(const BitVec& q) {
    std::uint64_t ones = 0;
    for (std::uint64_t len = 1; len <= q.size(); ++len) {
        ones += std::uint64_t(q[len - 1]);
        if (2 * ones > len)
            return CheckResult::fail("ones outnumber zeros in prefix of length " + std::to_string(len) +
                                         " (S = " + std::to_string(ones) + ")",
                                     len + 1); // stage index n whose prefix q[n] violates
    }
    return CheckResult::pass("checked " + std::to_string(q.size() + 1) + " prefixes, zero violations");
}

/// Per distinct active set, the emitted bits must be exactly 0,1,0,1,...
inline CheckResult verify_alternation(std::span<const StageRecord> trace) {
    std::unordered_map<ActiveSet, std::uint64_t, ActiveSetHash> occ;
    for (const StageRecord& r : trace) {
        const std::uint64_t before = occ[r.active]++;
        if (std::uint64_t(r.bit) != before % 2)
            return CheckResult::fail("active set at stage " + std::to_string(r.n) + " emitted bit " +
                                         std::to_string(r.bit) + " on occurrence " + std::to_string(before + 1),
                                     r.n);
    }
    return CheckResult::pass(std::to_string(occ.size()) + " distinct active sets, all strictly alternating");
}

struct BudgetRow {
    std::uint32_t level = 0;
    std::uint64_t observed = 0;
    std::uint64_t budget = 0;
};

struct BudgetReport {
    CheckResult result;
    std::vector<BudgetRow> rows;
};

/// Each level i can host at most i * (capacity(i) + 1) stages: each witness
/// index j <= i gains a count at every stage it certifies, and stops
/// qualifying once its count passes capacity(i).
inline BudgetReport verify_cutoff_budget(const std::map<std::uint32_t, std::uint64_t>& cutoff_histogram,
                                         const ThresholdRule& rule) {
    BudgetReport report;
    for (const auto& [level, observed] : cutoff_histogram) {
        const std::uint64_t cap = rule.capacity(level);
        constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t budget = (cap == kMax) ? kMax : cap + 1;
        budget = (budget > kMax / level) ? kMax : budget * level;
        report.rows.push_back({level, observed, budget});
        if (observed > budget && report.result.passed())
            report.result = CheckResult::fail("level " + std::to_string(level) + " used " +
                                                  std::to_string(observed) + " stages, budget " +
                                                  std::to_string(budget),
                                              level);
    }
    if (report.result.passed())
        report.result = CheckResult::pass(std::to_string(report.rows.size()) + " levels within budget");
    return report;
}

inline BudgetReport verify_cutoff_budget(std::span<const StageRecord> trace, const ThresholdRule& rule) {
    std::map<std::uint32_t, std::uint64_t> hist;
    for (const StageRecord& r : trace) ++hist[r.cutoff];
    return verify_cutoff_budget(hist, rule);
}

/// The subsequence an index's selection function cares about, recomputed by
/// re-evaluating the family on prefixes of q -- deliberately independent of
/// the construction ledgers.
struct SelectionTrace {
    std::uint64_t index = 1;
    std::uint64_t run_length = 0;
    std::vector<std::uint64_t> positions; // stages n with f_index(q[n]) = care
    BitVec selected;                      // bits q(n) at those stages
    bool finite_care = false;             // heuristic: no new position in the last half

    std::uint64_t count() const { return positions.size(); }
};

inline SelectionTrace select(const BitVec& q, const Family& family, std::uint64_t index) {
    SelectionTrace tr;
    tr.index = index;
    tr.run_length = q.size();
    SpecCursor cursor(family.spec_at(index));
    for (std::uint64_t n = 1; n <= q.size(); ++n) {
        if (cursor.decide() == Decision::Care) {
            tr.positions.push_back(n);
            tr.selected.push_back(q[n - 1]);
        }
        cursor.push(q[n - 1]);
    }
    tr.finite_care = tr.positions.empty() || tr.positions.back() * 2 <= q.size();
    return tr;
}

/// Cross-check of a retained trace against fresh family evaluation: at every
/// stage, the recorded active set must equal the caring indices <= cutoff, be
/// canonical, and contain its witness.
inline CheckResult cross_check_trace(std::span<const StageRecord> trace, const BitVec& q, const Family& family) {
    std::vector<std::optional<SpecCursor>> cursors;
    for (const StageRecord& r : trace) {
        if (!is_canonical_active_set(r.active) || r.active.back() > r.cutoff)
            return CheckResult::fail("active set not canonical at stage " + std::to_string(r.n), r.n);
        if (!std::binary_search(r.active.begin(), r.active.end(), r.witness))
            return CheckResult::fail("witness not in active set at stage " + std::to_string(r.n), r.n);
        ActiveSet recomputed;
        for (std::uint32_t j = 1; j <= r.cutoff; ++j) {
            if (std::size_t(j) > cursors.size()) cursors.resize(j);
            auto& slot = cursors[j - 1];
            if (!slot && family.has_index(j)) slot.emplace(family.spec_at(j));
            if (!slot) continue;
            while (slot->length() < r.n - 1) slot->push(q[slot->length()]);
            if (slot->decide() == Decision::Care) recomputed.push_back(j);
        }
        if (recomputed != r.active)
            return CheckResult::fail("recorded active set disagrees with family evaluation at stage " +
                                         std::to_string(r.n),
                                     r.n);
    }
    return CheckResult::pass("all " + std::to_string(trace.size()) + " stages consistent");
}

/// One maximal run of an index's zeta sequence between first occurrences of
/// successive cutoff values.
struct ZetaBlock {
    std::uint32_t value = 0;             // the cutoff level k this block belongs to
    std::uint64_t begin = 0;             // 0-based coordinate into zeta
    std::uint64_t length = 0;            // entries in the block
    std::uint64_t value_occurrences = 0; // entries equal to `value`
    std::uint64_t distinct_sets = 0;     // distinct active sets seen in the block
    std::uint64_t zeros = 0, ones = 0;   // selected bits inside the block
    bool complete = false;               // delimited by a first occurrence of value+1
};

/// Zeta sequence and block decomposition for one family index: cutoffs at the
/// index's selected stages, split at first occurrences of successive values
/// past the stabilization level.
struct ZetaBlocks {
    std::uint64_t index = 1;
    std::vector<std::uint32_t> zeta;
    std::optional<std::uint32_t> stabilization; // least k >= index with all later entries >= k
    std::uint64_t head_length = 0;              // p: selected stages before the stabilized tail
    std::vector<ZetaBlock> blocks;              // tail blocks; first has value == stabilization

    /// R at the boundary opening block b (1-based): N1 / (N0 + N1) over the
    /// tail bits before that boundary.
    std::optional<double> boundary_ratio(std::size_t b) const {
        if (b < 1 || b >= blocks.size()) return std::nullopt;
        std::uint64_t zeros = 0, ones = 0;
        for (std::size_t i = 0; i < b; ++i) {
            zeros += blocks[i].zeros;
            ones += blocks[i].ones;
        }
        if (zeros + ones == 0) return std::nullopt;
        return double(ones) / double(zeros + ones);
    }
};

inline ZetaBlocks zeta_blocks(std::span<const StageRecord> trace, const BitVec& q, const Family& family,
                              std::uint64_t index) {
    ZetaBlocks zb;
    zb.index = index;
    const SelectionTrace tr = select(q, family, index);
    zb.zeta.reserve(tr.count());
    for (std::uint64_t pos : tr.positions) zb.zeta.push_back(trace[pos - 1].cutoff);

    if (zb.zeta.empty()) return zb;

    // Stabilization level: least value k >= index whose first occurrence is
    // followed only by entries >= k. Retrospective, hence provisional: a
    // longer run could shift it.
    std::vector<std::uint32_t> suffix_min(zb.zeta.size());
    std::uint32_t running = zb.zeta.back();
    for (std::uint64_t i = zb.zeta.size(); i-- > 0;) {
        running = std::min(running, zb.zeta[i]);
        suffix_min[i] = running;
    }
    std::map<std::uint32_t, std::uint64_t> first_occurrence;
    for (std::uint64_t i = 0; i < zb.zeta.size(); ++i)
        first_occurrence.emplace(zb.zeta[i], i);
    for (const auto& [value, first] : first_occurrence) {
        if (value >= index && suffix_min[first] == value) {
            zb.stabilization = value;
            zb.head_length = first;
            break;
        }
    }
    if (!zb.stabilization) return zb;

    // Blocks: [first occurrence of k, first occurrence of k+1), then on.
    std::uint64_t start = zb.head_length;
    std::uint32_t value = *zb.stabilization;
    while (start < zb.zeta.size()) {
        std::uint64_t end = zb.zeta.size();
        const auto next = first_occurrence.find(value + 1);
        if (next != first_occurrence.end() && next->second > start) end = next->second;
        ZetaBlock block;
        block.value = value;
        block.begin = start;
        block.length = end - start;
        block.complete = end < zb.zeta.size();
        std::unordered_set<ActiveSet, ActiveSetHash> sets;
        for (std::uint64_t i = start; i < end; ++i) {
            if (zb.zeta[i] == value) ++block.value_occurrences;
            sets.insert(trace[tr.positions[i] - 1].active);
            if (tr.selected[i]) ++block.ones;
            else ++block.zeros;
        }
        block.distinct_sets = sets.size();
        zb.blocks.push_back(std::move(block));
        start = end;
        ++value;
    }
    return zb;
}

/// Block facts for completed blocks in the stabilized tail: the block for
/// level k holds at least capacity(k) occurrences of k before k+1 first
/// appears, and contains at most 2^k distinct active sets.
inline CheckResult verify_block_facts(const ZetaBlocks& zb, const ThresholdRule& rule) {
    if (!zb.stabilization) return CheckResult::inconclusive("no stabilized tail found");
    std::uint64_t completed = 0;
    for (const ZetaBlock& b : zb.blocks) {
        if (!b.complete) continue;
        ++completed;
        if (b.value_occurrences < rule.capacity(b.value))
            return CheckResult::fail("block for level " + std::to_string(b.value) + " has only " +
                                         std::to_string(b.value_occurrences) + " occurrences, needs " +
                                         std::to_string(rule.capacity(b.value)),
                                     b.value);
        if (b.distinct_sets > saturating_pow(2, b.value))
            return CheckResult::fail("block for level " + std::to_string(b.value) + " holds " +
                                         std::to_string(b.distinct_sets) + " distinct sets, limit " +
                                         std::to_string(saturating_pow(2, b.value)),
                                     b.value);
    }
    if (completed == 0) return CheckResult::inconclusive("no block has completed yet");
    return CheckResult::pass(std::to_string(completed) + " completed blocks within bounds");
}

/// Deficit bounds at block boundaries of the stabilized tail, with N0/N1 the
/// zero/one counts over tail bits before the boundary and p the head length:
///   N0 <= N1 + sum_{i=0..b} 2^(k+i)   (unmatched 0s bounded by distinct sets)
///   N1 <= N0 + p                      (unmatched 1s only from head effects)
inline CheckResult verify_deficit_bounds(const ZetaBlocks& zb) {
    if (!zb.stabilization) return CheckResult::inconclusive("no stabilized tail found");
    if (zb.blocks.size() < 2) return CheckResult::inconclusive("no block boundary reached yet");
    const std::uint32_t k = *zb.stabilization;
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t zeros = 0, ones = 0;
    for (std::size_t b = 1; b < zb.blocks.size(); ++b) {
        zeros += zb.blocks[b - 1].zeros;
        ones += zb.blocks[b - 1].ones;
        std::uint64_t allowance = 0; // sum_{i=0..b} 2^(k+i), saturating
        for (std::uint32_t i = 0; i <= std::uint32_t(b); ++i) {
            const std::uint64_t t = saturating_pow(2, k + i);
            allowance = (allowance > kMax - t) ? kMax : allowance + t;
        }
        if (zeros > ones && zeros - ones > allowance)
            return CheckResult::fail("boundary " + std::to_string(b) + ": N0 - N1 = " +
                                         std::to_string(zeros - ones) + " exceeds allowance " +
                                         std::to_string(allowance),
                                     b);
        if (ones > zeros && ones - zeros > zb.head_length)
            return CheckResult::fail("boundary " + std::to_string(b) + ": N1 - N0 = " +
                                         std::to_string(ones - zeros) + " exceeds head length " +
                                         std::to_string(zb.head_length),
                                     b);
    }
    return CheckResult::pass(std::to_string(zb.blocks.size() - 1) + " boundaries checked, p = " +
                             std::to_string(zb.head_length));
}

struct ConvergenceCheckpoint {
    std::uint64_t m = 0;         // selected-prefix length, a power of two
    std::int64_t two_delta = 0;  // 2*S(m) - m
    double abs_deviation = 0.0;  // |S(m)/m - 1/2|
};

struct ConvergenceReport {
    std::uint64_t index = 1;
    bool finite_care = false; // exempt from the convergence hypothesis
    std::vector<ConvergenceCheckpoint> checkpoints;
    double final_deviation = 0.0;
    bool envelope_ok = true; // dev may at most double between checkpoints past envelope_from
    std::uint64_t envelope_from = 1024;
};

/// Deviations |S(m)/m - 1/2| at dyadic checkpoints m = 2^j. The envelope flag
/// compares adjacent checkpoints with exact integer arithmetic.
inline ConvergenceReport convergence_report(const SelectionTrace& tr, std::uint64_t envelope_from = 1024) {
    ConvergenceReport rep;
    rep.index = tr.index;
    rep.finite_care = tr.finite_care;
    rep.envelope_from = envelope_from;
    for (std::uint64_t m = 1; m <= tr.count(); m *= 2) {
        const std::uint64_t ones = tr.selected.count_ones(m);
        const std::int64_t td = 2 * std::int64_t(ones) - std::int64_t(m);
        rep.checkpoints.push_back({m, td, std::abs(double(td)) / (2.0 * double(m))});
    }
    if (!rep.checkpoints.empty()) rep.final_deviation = rep.checkpoints.back().abs_deviation;
    for (std::size_t i = 1; i < rep.checkpoints.size(); ++i) {
        const auto& a = rep.checkpoints[i - 1];
        const auto& b = rep.checkpoints[i];
        if (a.m < envelope_from) continue;
        // |td_b| / (2 m_b) <= 2 |td_a| / (2 m_a), cross-multiplied in integers
        const std::uint64_t lhs = std::uint64_t(std::abs(b.two_delta)) * a.m;
        const std::uint64_t rhs = 2 * std::uint64_t(std::abs(a.two_delta)) * b.m;
        if (lhs > rhs) rep.envelope_ok = false;
    }
    return rep;
}

struct FluctuationReport {
    std::uint64_t index = 1;
    std::uint64_t count = 0;              // selected bits examined
    std::int64_t max_two_delta = 0;       // extrema of 2*delta over m >= 1
    std::int64_t min_two_delta = 0;
    std::uint64_t argmax_m = 0, argmax_stage = 0;
    std::uint64_t argmin_m = 0, argmin_stage = 0;
    std::vector<std::pair<std::uint64_t, std::int64_t>> envelope; // (m, running min 2*delta)
    std::optional<double> fitted_exponent;  // log-log slope of -min delta envelope
    std::optional<double> fitted_constant;  // exp(intercept)
    std::optional<double> target_exponent;  // ln 2 / ln r for exponential rules
};

/// Fluctuation extrema and the growth exponent of the downward envelope,
/// fitted by least squares over dyadic checkpoints with a negative minimum.
inline FluctuationReport fluctuation_report(const SelectionTrace& tr, const ThresholdRule& rule) {
    FluctuationReport rep;
    rep.index = tr.index;
    rep.count = tr.count();
    rep.target_exponent = rule.target_exponent();
    std::int64_t td = 0, min_td = 0, max_td = 0;
    bool first = true;
    std::uint64_t next_checkpoint = 1;
    for (std::uint64_t m = 1; m <= tr.count(); ++m) {
        td += tr.selected[m - 1] ? 1 : -1;
        if (first || td > max_td) {
            max_td = td;
            rep.argmax_m = m;
            rep.argmax_stage = tr.positions[m - 1];
        }
        if (first || td < min_td) {
            min_td = td;
            rep.argmin_m = m;
            rep.argmin_stage = tr.positions[m - 1];
        }
        first = false;
        if (m == next_checkpoint) {
            rep.envelope.emplace_back(m, min_td);
            next_checkpoint *= 2;
        }
    }
    rep.max_two_delta = first ? 0 : max_td;
    rep.min_two_delta = first ? 0 : min_td;

    // Least-squares fit of ln(-min delta) against ln m.
    std::vector<double> xs, ys;
    for (const auto& [m, mn] : rep.envelope) {
        if (mn >= 0) continue;
        xs.push_back(std::log(double(m)));
        ys.push_back(std::log(double(-mn) / 2.0));
    }
    if (xs.size() >= 3) {
        const double n = double(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        const double denom = n * sxx - sx * sx;
        if (denom > 0) {
            const double slope = (n * sxy - sx * sy) / denom;
            rep.fitted_exponent = slope;
            rep.fitted_constant = std::exp((sy - slope * sx) / n);
        }
    }
    return rep;
}

/// Exact finite-family bound for build_finite output: for every family index
/// and every selected-prefix length m, 0 <= m/2 - S(m) <= 2^k with k the
/// family size. Checked as 0 <= m - 2*S(m) <= 2^(k+1) in integers.
inline CheckResult verify_finite_bound(const BitVec& q, const Family& family) {
    if (!family.is_finite()) throw ConfigError("finite-family bound requires a finite family");
    const std::uint64_t k = family.explicit_size();
    const std::uint64_t limit = saturating_pow(2, std::uint32_t(k + 1));
    for (std::uint64_t index = 1; index <= k; ++index) {
        SpecCursor cursor(family.spec_at(index));
        std::int64_t m = 0, twice_sum = 0;
        for (std::uint64_t n = 1; n <= q.size(); ++n) {
            if (cursor.decide() == Decision::Care) {
                ++m;
                twice_sum += 2 * q[n - 1];
                const std::int64_t deficit = m - twice_sum; // = 2*(m/2 - S)
                if (deficit < 0)
                    return CheckResult::fail("f" + std::to_string(index) + ": selected ones exceed half at m = " +
                                                 std::to_string(m),
                                             n);
                if (std::uint64_t(deficit) > limit)
                    return CheckResult::fail("f" + std::to_string(index) + ": deficit " + std::to_string(deficit) +
                                                 "/2 exceeds 2^" + std::to_string(k) + " at m = " + std::to_string(m),
                                             n);
            }
            cursor.push(q[n - 1]);
        }
    }
    return CheckResult::pass("bound 0 <= m/2 - S <= 2^" + std::to_string(k) + " held for all " +
                             std::to_string(k) + " functions");
}

/// The iterated-logarithm contrast curve (1 - eps) * sqrt(n ln ln n) / sqrt 2,
/// the fluctuation scale genuine coin flipping would exceed infinitely often.
inline double lil_curve(std::uint64_t n, double eps_prime) {
    if (n < 3) throw std::domain_error("lil_curve requires n >= 3");
    if (!(eps_prime >= 0.0 && eps_prime <= 1.0)) throw std::domain_error("lil_curve requires 0 <= eps' <= 1");
    const double x = double(n);
    return (1.0 - eps_prime) * std::sqrt(x * std::log(std::log(x))) / std::sqrt(2.0);
}

} // namespace ville
