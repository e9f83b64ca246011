#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ville/construction.hpp"
#include "ville/family.hpp"

namespace ville {

enum class TraceRetention : std::uint8_t { None, Full };

struct RunConfig {
    Family family;
    std::uint64_t length = 0;
    ThresholdRule rule = ThresholdRule::exp_base(3);
    TraceRetention trace = TraceRetention::None;
};

struct RunStats {
    std::map<std::uint32_t, std::uint64_t> cutoff_histogram;
    std::uint32_t max_cutoff = 0;
    std::uint64_t max_queried_index = 0;
    // Stages where some family index above that stage's cutoff was queried.
    // The construction never does this; a nonzero value is a bug.
    std::uint64_t laziness_violations = 0;
    std::uint64_t first_violation_stage = 0;
};

/// Stage-by-stage generator for the feedback construction: at stage n the
/// caring set is evaluated on the bits emitted so far, one stage is applied,
/// and the new bit is appended. step() may be called any number of times;
/// RunConfig.length is only the target used by build().
///
/// Family indices are evaluated through incremental cursors created on first
/// query, so no stage ever touches an index above its own cutoff.
class Builder {
public:
    explicit Builder(RunConfig config)
        : family_(std::move(config.family)), rule_(std::move(config.rule)) {
        bits_.reserve(config.length);
    }

    StageRecord step() {
        stage_max_query_ = 0;
        for (auto& m : memo_) m = -1;
        const auto cares = [this](std::uint32_t j) { return care_of(j); };
        StageRecord rec = apply_stage(state_, cares, rule_);
        bits_.push_back(rec.bit);
        ++stats_.cutoff_histogram[rec.cutoff];
        if (rec.cutoff > stats_.max_cutoff) stats_.max_cutoff = rec.cutoff;
        if (stage_max_query_ > rec.cutoff) {
            if (stats_.laziness_violations++ == 0) stats_.first_violation_stage = rec.n;
        }
        return rec;
    }

    std::uint64_t stages() const { return state_.stage_count; }
    const BitVec& bits() const { return bits_; }
    const RunStats& stats() const { return stats_; }
    const ConstructionState& state() const { return state_; }
    const Family& family() const { return family_; }
    const ThresholdRule& rule() const { return rule_; }

private:
    Decision care_of(std::uint32_t j) {
        if (j > stage_max_query_) stage_max_query_ = j;
        if (j > stats_.max_queried_index) stats_.max_queried_index = j;
        if (std::size_t(j) > memo_.size()) memo_.resize(j, -1);
        if (memo_[j - 1] >= 0) return Decision(memo_[j - 1]);
        Decision d = Decision::DontCare;
        if (family_.has_index(j)) {
            // Indices past a finite family simply never care; the cutoff
            // search therefore never needs a missing index.
            if (std::size_t(j) > cursors_.size()) cursors_.resize(j);
            auto& slot = cursors_[j - 1];
            if (!slot) slot.emplace(family_.spec_at(j));
            while (slot->length() < bits_.size()) slot->push(bits_[slot->length()]);
            d = slot->decide();
        }
        memo_[j - 1] = std::int8_t(d);
        return d;
    }

    Family family_;
    ThresholdRule rule_;
    ConstructionState state_;
    BitVec bits_;
    std::vector<std::optional<SpecCursor>> cursors_;
    std::vector<std::int8_t> memo_; // per-stage decision cache; -1 = unknown
    std::uint32_t stage_max_query_ = 0;
    RunStats stats_;
};

struct BuildResult {
    BitVec bits;
    std::vector<StageRecord> trace; // empty unless TraceRetention::Full
    RunStats stats;
};

/// Runs the feedback loop for config.length stages. Deterministic: identical
/// configs produce bit-identical output.
inline BuildResult build(const RunConfig& config) {
    Builder gen(config);
    BuildResult out;
    if (config.trace == TraceRetention::Full) out.trace.reserve(config.length);
    for (std::uint64_t n = 0; n < config.length; ++n) {
        StageRecord rec = gen.step();
        if (config.trace == TraceRetention::Full) out.trace.push_back(std::move(rec));
    }
    out.bits = gen.bits();
    out.stats = gen.stats();
    return out;
}

/// The finite-family construction: no cutoff, the caring set C(n) is the full
/// set of caring indices, and q(n) is the prior occurrence count of C(n)
/// mod 2.
inline BitVec build_finite(const Family& family, std::uint64_t length) {
    if (!family.is_finite())
        throw ConfigError("finite construction requires a finite family (no tail rule)");
    const std::uint64_t k = family.explicit_size();
    std::vector<SpecCursor> cursors;
    cursors.reserve(k);
    for (std::uint64_t j = 1; j <= k; ++j) cursors.emplace_back(family.spec_at(j));

    std::unordered_map<ActiveSet, std::uint64_t, ActiveSetHash> occurrences;
    BitVec q;
    q.reserve(length);
    for (std::uint64_t n = 1; n <= length; ++n) {
        ActiveSet caring;
        for (std::uint64_t j = 0; j < k; ++j)
            if (cursors[j].decide() == Decision::Care) caring.push_back(std::uint32_t(j + 1));
        const int bit = int(occurrences[caring]++ % 2);
        q.push_back(bit);
        for (auto& c : cursors) c.push(bit);
    }
    return q;
}

} // namespace ville
