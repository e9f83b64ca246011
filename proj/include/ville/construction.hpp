#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ville/selection.hpp"
#include "ville/threshold.hpp"

namespace ville {

/// Canonical active set: strictly increasing indices, always containing 1.
using ActiveSet = std::vector<std::uint32_t>;

inline bool is_canonical_active_set(const ActiveSet& s) {
    if (s.empty() || s.front() != 1) return false;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] <= s[i - 1]) return false;
    return true;
}

struct ActiveSetHash {
    std::size_t operator()(const ActiveSet& s) const {
        // FNV-1a over the elements.
        std::uint64_t h = 1469598103934665603ULL;
        for (std::uint32_t v : s) {
            h ^= v;
            h *= 1099511628211ULL;
        }
        return std::size_t(h);
    }
};

/// Sparse ledger of card{ m < n : j in A*(m) and I(m) = i } per (index j,
/// cutoff level i). Counts only ever grow.
class CountLedger {
public:
    std::uint64_t get(std::uint32_t index, std::uint32_t level) const {
        const auto it = counts_.find(key(index, level));
        return it == counts_.end() ? 0 : it->second;
    }

    void increment(std::uint32_t index, std::uint32_t level) { ++counts_[key(index, level)]; }

    std::uint64_t entries() const { return counts_.size(); }

    template <class Fn> // Fn(index, level, count)
    void for_each(Fn&& fn) const {
        for (const auto& [k, c] : counts_) fn(std::uint32_t(k >> 32), std::uint32_t(k & 0xffffffffu), c);
    }

private:
    static std::uint64_t key(std::uint32_t index, std::uint32_t level) {
        return (std::uint64_t(index) << 32) | level;
    }
    std::unordered_map<std::uint64_t, std::uint64_t> counts_;
};

/// Sparse ledger of how often each distinct active set has occurred.
class ParityLedger {
public:
    std::uint64_t occurrences(const ActiveSet& s) const {
        const auto it = occ_.find(s);
        return it == occ_.end() ? 0 : it->second;
    }

    void record(const ActiveSet& s) {
        ++occ_[s];
        ++total_;
    }

    /// Sum of occurrence counts; equals the number of completed stages.
    std::uint64_t total_recorded() const { return total_; }
    std::uint64_t distinct_sets() const { return occ_.size(); }

private:
    std::unordered_map<ActiveSet, std::uint64_t, ActiveSetHash> occ_;
    std::uint64_t total_ = 0;
};

/// Per-stage trace entry: everything the stage decided.
struct StageRecord {
    std::uint64_t n = 0;       // stage index, 1-based
    std::uint32_t cutoff = 0;  // I(n)
    std::uint32_t witness = 0; // least index certifying the cutoff
    ActiveSet active;          // A*(n)
    int bit = 0;               // q(n)

    friend bool operator==(const StageRecord&, const StageRecord&) = default;
};

struct CutoffResult {
    std::uint32_t cutoff = 0;
    std::uint32_t witness = 0;
};

/// The stage cutoff I(n): the least level i such that some caring index
/// j <= i still has ledger count(j, i) within capacity(i). The witness is the
/// least such j. Queries cares(j) only for j <= the returned cutoff.
///
/// Terminates because index 1 always cares and count(1, i) is bounded by the
/// completed stage count while capacity(i) grows without bound.
template <class Cares> // Cares: (std::uint32_t index) -> Decision
CutoffResult compute_cutoff(const CountLedger& counts, Cares&& cares, const ThresholdRule& rule) {
    if (cares(1) != Decision::Care)
        throw std::logic_error("compute_cutoff requires a family whose index 1 always cares");
    for (std::uint32_t i = 1;; ++i) {
        const std::uint64_t cap = rule.capacity(i);
        for (std::uint32_t j = 1; j <= i; ++j)
            if (cares(j) == Decision::Care && counts.get(j, i) <= cap) return {i, j};
    }
}

/// A*(n): the caring indices up to the cutoff, in canonical form. Queries
/// cares(j) only for j <= cutoff.
template <class Cares>
ActiveSet compute_active_set(Cares&& cares, std::uint32_t cutoff) {
    ActiveSet active;
    for (std::uint32_t j = 1; j <= cutoff; ++j)
        if (cares(j) == Decision::Care) active.push_back(j);
    return active;
}

/// The emitted bit: the number of earlier occurrences of this exact active
/// set, mod 2. Does not mutate the ledger.
inline int parity_bit(const ParityLedger& parities, const ActiveSet& active) {
    return int(parities.occurrences(active) % 2);
}

struct ConstructionState {
    CountLedger counts;
    ParityLedger parities;
    std::uint64_t stage_count = 0;
};

/// One full stage: cutoff, active set, bit, then ledger updates. Depends only
/// on the current ledgers and the cares predicate; no lookahead.
template <class Cares>
StageRecord apply_stage(ConstructionState& state, Cares&& cares, const ThresholdRule& rule) {
    const CutoffResult cr = compute_cutoff(state.counts, cares, rule);
    ActiveSet active = compute_active_set(cares, cr.cutoff);
    const int bit = parity_bit(state.parities, active);
    for (std::uint32_t j : active) state.counts.increment(j, cr.cutoff);
    state.parities.record(active);
    ++state.stage_count;
    return StageRecord{state.stage_count, cr.cutoff, cr.witness, std::move(active), bit};
}

} // namespace ville
