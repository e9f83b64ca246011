#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ville/errors.hpp"

namespace ville {

/// base^exp, clamped to the largest uint64 value on overflow. Saturated
/// capacities behave correctly: a level whose budget exceeds any reachable
/// count simply never exhausts.
inline std::uint64_t saturating_pow(std::uint64_t base, std::uint32_t exp) {
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t r = 1;
    while (exp-- > 0) {
        if (base != 0 && r > kMax / base) return kMax;
        r *= base;
    }
    return r;
}

/// Per-level occurrence budget controlling when the stage cutoff may rise:
/// capacity(i) = r^i for an exponential rule, or an explicit table h(i).
/// Every level actually consulted must satisfy capacity(i) > 2^i, otherwise
/// the per-block deficit ratio would not vanish.
class ThresholdRule {
public:
    static ThresholdRule exp_base(std::uint32_t base) {
        if (base < 3)
            throw ConfigError("threshold base must be at least 3 (capacities r^i require r > 2), got " +
                              std::to_string(base));
        ThresholdRule r;
        r.base_ = base;
        return r;
    }

    static ThresholdRule table(std::vector<std::uint64_t> capacities) {
        if (capacities.empty()) throw ConfigError("threshold table must be nonempty");
        for (std::size_t i = 0; i < capacities.size(); ++i) {
            if (capacities[i] < 1) throw ConfigError("threshold table entries must be >= 1");
            if (i > 0 && capacities[i] <= capacities[i - 1])
                throw ConfigError("threshold table must be strictly increasing (line " + std::to_string(i + 1) +
                                  ": " + std::to_string(capacities[i]) + " <= " + std::to_string(capacities[i - 1]) +
                                  ")");
        }
        ThresholdRule r;
        r.table_ = std::move(capacities);
        return r;
    }

    /// Table file: one capacity per line, line i = h(i). Blank lines and
    /// `#` comments ignored.
    static ThresholdRule load_table(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open threshold table '" + path.string() + "'");
        std::vector<std::uint64_t> caps;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string_view t = detail_trim(line);
            if (t.empty() || t.front() == '#') continue;
            std::uint64_t v = 0;
            for (char c : t) {
                if (c < '0' || c > '9')
                    throw ConfigError("threshold table line " + std::to_string(lineno) + ": bad capacity '" +
                                      std::string(t) + "'");
                v = v * 10 + std::uint64_t(c - '0');
            }
            caps.push_back(v);
        }
        return table(std::move(caps));
    }

    /// Budget for cutoff level i >= 1. Throws ConfigError when a table is
    /// exhausted or a consulted level violates capacity(i) > 2^i.
    std::uint64_t capacity(std::uint32_t level) const {
        if (level < 1) throw ConfigError("threshold level must be >= 1");
        std::uint64_t cap;
        if (base_ != 0) {
            cap = saturating_pow(base_, level);
        } else {
            if (level > table_.size())
                throw ConfigError("threshold table exhausted: run needs capacity for level " +
                                  std::to_string(level) + " but table has " + std::to_string(table_.size()) +
                                  " entries");
            cap = table_[level - 1];
        }
        constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t two_i = saturating_pow(2, level);
        if (cap != kMax && cap <= two_i)
            throw ConfigError("capacity(" + std::to_string(level) + ") = " + std::to_string(cap) +
                              " must exceed 2^" + std::to_string(level));
        return cap;
    }

    bool is_exponential() const { return base_ != 0; }
    std::uint32_t base() const { return base_; }

    /// Expected fluctuation growth exponent ln 2 / ln r; absent for tables.
    std::optional<double> target_exponent() const {
        if (!is_exponential()) return std::nullopt;
        return std::log(2.0) / std::log(double(base_));
    }

    std::string describe() const {
        if (is_exponential()) return "exp:" + std::to_string(base_);
        return "table(" + std::to_string(table_.size()) + " levels)";
    }

    friend bool operator==(const ThresholdRule&, const ThresholdRule&) = default;

private:
    ThresholdRule() = default;

    static std::string_view detail_trim(std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
        return s;
    }

    std::uint32_t base_ = 0;             // 0 means table rule
    std::vector<std::uint64_t> table_;
};

} // namespace ville
