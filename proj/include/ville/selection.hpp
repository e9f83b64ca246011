#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ville/bits.hpp"
#include "ville/errors.hpp"

namespace ville {

/// A selection function's verdict on a prefix: include the next bit or not.
enum class Decision : std::uint8_t { DontCare = 0, Care = 1 };

enum class SelectionKind : std::uint8_t {
    Always,       // cares about every prefix
    LastBit,      // cares iff the prefix is nonempty and ends in the given bit
    ContainsOne,  // cares iff a 1 appears somewhere in the prefix
    Suffix,       // cares iff the prefix ends with the given pattern
    Periodic,     // cares iff the prefix length is congruent to r mod k
    ZerosRun,     // cares iff the prefix ends with at least k consecutive 0s
    MajorityOnes, // cares iff the prefix has strictly more 1s than 0s
};

/// Parameterized description of a pure selection function: a deterministic
/// map from finite bit strings to care / don't-care. A spec fully determines
/// the function; there is no hidden state.
class SelectionSpec {
public:
    static SelectionSpec always() { return SelectionSpec(SelectionKind::Always); }

    static SelectionSpec last_bit(int bit) {
        if (bit != 0 && bit != 1) throw ConfigError("last_bit argument must be 0 or 1");
        SelectionSpec s(SelectionKind::LastBit);
        s.bit_ = std::uint8_t(bit);
        return s;
    }

    static SelectionSpec contains_one() { return SelectionSpec(SelectionKind::ContainsOne); }

    static SelectionSpec suffix(std::string_view pattern) {
        if (pattern.empty()) throw ConfigError("suffix pattern must be nonempty");
        SelectionSpec s(SelectionKind::Suffix);
        s.pattern_.reserve(pattern.size());
        for (char c : pattern) {
            if (c != '0' && c != '1') throw ConfigError("suffix pattern may contain only '0' and '1'");
            s.pattern_.push_back(std::uint8_t(c - '0'));
        }
        return s;
    }

    static SelectionSpec periodic(std::uint32_t modulus, std::uint32_t residue) {
        if (modulus < 1) throw ConfigError("periodic modulus must be >= 1");
        if (residue >= modulus) throw ConfigError("periodic residue must be < modulus");
        SelectionSpec s(SelectionKind::Periodic);
        s.modulus_ = modulus;
        s.residue_ = residue;
        return s;
    }

    static SelectionSpec zeros_run(std::uint32_t run) {
        if (run < 1) throw ConfigError("zeros_run length must be >= 1");
        SelectionSpec s(SelectionKind::ZerosRun);
        s.run_ = run;
        return s;
    }

    static SelectionSpec majority_ones() { return SelectionSpec(SelectionKind::MajorityOnes); }

    SelectionKind kind() const { return kind_; }
    int last_bit_value() const { return bit_; }
    const std::vector<std::uint8_t>& pattern() const { return pattern_; }
    std::uint32_t modulus() const { return modulus_; }
    std::uint32_t residue() const { return residue_; }
    std::uint32_t run_length() const { return run_; }

    /// Canonical textual form, e.g. "last_bit(1)" or "suffix(01)".
    std::string name() const {
        switch (kind_) {
        case SelectionKind::Always: return "always";
        case SelectionKind::LastBit: return "last_bit(" + std::to_string(int(bit_)) + ")";
        case SelectionKind::ContainsOne: return "contains_one";
        case SelectionKind::Suffix: {
            std::string p;
            for (std::uint8_t b : pattern_) p += char('0' + b);
            return "suffix(" + p + ")";
        }
        case SelectionKind::Periodic:
            return "periodic(" + std::to_string(modulus_) + "," + std::to_string(residue_) + ")";
        case SelectionKind::ZerosRun: return "zeros_run(" + std::to_string(run_) + ")";
        case SelectionKind::MajorityOnes: return "majority_ones";
        }
        return {};
    }

    /// Inverse of name(). Accepts surrounding whitespace; throws ConfigError
    /// on anything it does not recognize.
    static SelectionSpec parse(std::string_view text);

    friend bool operator==(const SelectionSpec&, const SelectionSpec&) = default;

private:
    explicit SelectionSpec(SelectionKind k) : kind_(k) {}

    SelectionKind kind_;
    std::uint8_t bit_ = 0;
    std::uint32_t modulus_ = 0;
    std::uint32_t residue_ = 0;
    std::uint32_t run_ = 0;
    std::vector<std::uint8_t> pattern_;
};

/// Evaluates a selection spec on a prefix. Pure: same input, same output.
inline Decision evaluate(const SelectionSpec& spec, BitSpan prefix) {
    const std::uint64_t n = prefix.size();
    switch (spec.kind()) {
    case SelectionKind::Always:
        return Decision::Care;
    case SelectionKind::LastBit:
        return (n > 0 && prefix[n - 1] == spec.last_bit_value()) ? Decision::Care : Decision::DontCare;
    case SelectionKind::ContainsOne:
        return prefix.has_one() ? Decision::Care : Decision::DontCare;
    case SelectionKind::Suffix: {
        const auto& p = spec.pattern();
        if (n < p.size()) return Decision::DontCare;
        for (std::uint64_t i = 0; i < p.size(); ++i)
            if (prefix[n - p.size() + i] != p[i]) return Decision::DontCare;
        return Decision::Care;
    }
    case SelectionKind::Periodic:
        return (n % spec.modulus() == spec.residue()) ? Decision::Care : Decision::DontCare;
    case SelectionKind::ZerosRun: {
        if (n < spec.run_length()) return Decision::DontCare;
        for (std::uint64_t i = n - spec.run_length(); i < n; ++i)
            if (prefix[i] != 0) return Decision::DontCare;
        return Decision::Care;
    }
    case SelectionKind::MajorityOnes:
        return (2 * prefix.count_ones() > n) ? Decision::Care : Decision::DontCare;
    }
    return Decision::DontCare;
}

inline Decision evaluate(const SelectionSpec& spec, const BitVec& prefix) {
    return evaluate(spec, span_of(prefix));
}

/// Incremental evaluator. Feeding bits one at a time, decide() answers the
/// same question as evaluate() on the accumulated prefix, in time independent
/// of the prefix length. Agreement with evaluate() is property-tested.
class SpecCursor {
public:
    explicit SpecCursor(SelectionSpec spec) : spec_(std::move(spec)) {
        if (spec_.kind() == SelectionKind::Suffix) ring_.assign(spec_.pattern().size(), 0);
    }

    void push(int bit) {
        switch (spec_.kind()) {
        case SelectionKind::LastBit:
            last_ = bit;
            break;
        case SelectionKind::ContainsOne:
            seen_one_ = seen_one_ || bit == 1;
            break;
        case SelectionKind::Suffix:
            ring_[len_ % ring_.size()] = std::uint8_t(bit);
            break;
        case SelectionKind::ZerosRun:
            zero_run_ = (bit == 0) ? zero_run_ + 1 : 0;
            break;
        case SelectionKind::MajorityOnes:
            ones_ += std::uint64_t(bit);
            break;
        default:
            break;
        }
        ++len_;
    }

    Decision decide() const {
        switch (spec_.kind()) {
        case SelectionKind::Always:
            return Decision::Care;
        case SelectionKind::LastBit:
            return (len_ > 0 && last_ == spec_.last_bit_value()) ? Decision::Care : Decision::DontCare;
        case SelectionKind::ContainsOne:
            return seen_one_ ? Decision::Care : Decision::DontCare;
        case SelectionKind::Suffix: {
            const auto& p = spec_.pattern();
            if (len_ < p.size()) return Decision::DontCare;
            // ring_[len_ % P] is the oldest retained bit.
            for (std::uint64_t i = 0; i < p.size(); ++i)
                if (ring_[(len_ + i) % p.size()] != p[i]) return Decision::DontCare;
            return Decision::Care;
        }
        case SelectionKind::Periodic:
            return (len_ % spec_.modulus() == spec_.residue()) ? Decision::Care : Decision::DontCare;
        case SelectionKind::ZerosRun:
            return (zero_run_ >= spec_.run_length()) ? Decision::Care : Decision::DontCare;
        case SelectionKind::MajorityOnes:
            return (2 * ones_ > len_) ? Decision::Care : Decision::DontCare;
        }
        return Decision::DontCare;
    }

    /// Bits consumed so far.
    std::uint64_t length() const { return len_; }

    const SelectionSpec& spec() const { return spec_; }

private:
    SelectionSpec spec_;
    std::uint64_t len_ = 0;
    int last_ = -1;
    bool seen_one_ = false;
    std::uint64_t zero_run_ = 0;
    std::uint64_t ones_ = 0;
    std::vector<std::uint8_t> ring_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::uint64_t parse_uint(std::string_view s, std::string_view what) {
    s = trim(s);
    if (s.empty()) throw ConfigError("missing integer for " + std::string(what));
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw ConfigError("bad integer '" + std::string(s) + "' for " + std::string(what));
        v = v * 10 + std::uint64_t(c - '0');
        if (v > (std::uint64_t(1) << 62)) throw ConfigError("integer out of range for " + std::string(what));
    }
    return v;
}

} // namespace detail

inline SelectionSpec SelectionSpec::parse(std::string_view text) {
    std::string_view t = detail::trim(text);
    std::string_view head = t, args;
    const auto open = t.find('(');
    if (open != std::string_view::npos) {
        if (t.back() != ')') throw ConfigError("unbalanced parentheses in '" + std::string(text) + "'");
        head = detail::trim(t.substr(0, open));
        args = t.substr(open + 1, t.size() - open - 2);
    }
    auto split_args = [&](std::size_t expected) {
        std::vector<std::string_view> out;
        std::string_view rest = args;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            out.push_back(detail::trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (out.size() != expected)
            throw ConfigError("'" + std::string(head) + "' expects " + std::to_string(expected) + " argument(s)");
        return out;
    };

    if (head == "always") return always();
    if (head == "last_bit") {
        const auto a = split_args(1);
        return last_bit(int(detail::parse_uint(a[0], "last_bit")));
    }
    if (head == "contains_one") return contains_one();
    if (head == "suffix") {
        const auto a = split_args(1);
        return suffix(a[0]);
    }
    if (head == "periodic") {
        const auto a = split_args(2);
        return periodic(std::uint32_t(detail::parse_uint(a[0], "periodic modulus")),
                        std::uint32_t(detail::parse_uint(a[1], "periodic residue")));
    }
    if (head == "zeros_run") {
        const auto a = split_args(1);
        return zeros_run(std::uint32_t(detail::parse_uint(a[0], "zeros_run")));
    }
    if (head == "majority_ones") return majority_ones();
    throw ConfigError("unknown selection function '" + std::string(head) + "'");
}

} // namespace ville
