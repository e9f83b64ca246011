#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ville/selection.hpp"

namespace ville {

/// Built-in tail rule "suffix_binary": index m maps to suffix(<binary digits
/// of m, most significant first>), so every index beyond the explicit list is
/// a distinct suffix matcher.
inline SelectionSpec suffix_binary_spec(std::uint64_t index) {
    if (index < 1) throw ConfigError("suffix_binary index must be >= 1");
    std::string digits;
    for (std::uint64_t v = index; v > 0; v >>= 1) digits += char('0' + (v & 1));
    std::reverse(digits.begin(), digits.end());
    return SelectionSpec::suffix(digits);
}

/// Ordered countable family of selection functions, 1-based. Index 1 must be
/// the always-care function. With a tail rule the family is defined at every
/// index; tail specs are generated lazily and cached, so querying index m
/// never materializes any index beyond m.
class Family {
public:
    enum class TailRule : std::uint8_t { None, SuffixBinary };

    explicit Family(std::vector<SelectionSpec> specs, TailRule tail = TailRule::None)
        : explicit_(std::move(specs)), tail_(tail) {
        if (explicit_.empty()) throw ConfigError("family must list at least one selection function");
        if (explicit_.front().kind() != SelectionKind::Always)
            throw ConfigError("family index 1 must be 'always'");
    }

    bool is_finite() const { return tail_ == TailRule::None; }
    std::uint64_t explicit_size() const { return explicit_.size(); }
    TailRule tail_rule() const { return tail_; }

    bool has_index(std::uint64_t index) const {
        return index >= 1 && (index <= explicit_.size() || !is_finite());
    }

    const SelectionSpec& spec_at(std::uint64_t index) const {
        if (index < 1) throw UndefinedIndexError("family index must be >= 1");
        if (index <= explicit_.size()) return explicit_[index - 1];
        if (is_finite())
            throw UndefinedIndexError("family has no index " + std::to_string(index) +
                                      " (finite family of size " + std::to_string(explicit_.size()) + ")");
        auto it = tail_cache_.find(index);
        if (it == tail_cache_.end()) {
            it = tail_cache_.emplace(index, suffix_binary_spec(index)).first;
            ++tail_calls_;
            if (index > max_generated_) max_generated_ = index;
        }
        return it->second;
    }

    // Tail-generator bookkeeping, used by the laziness tests.
    std::uint64_t tail_generator_calls() const { return tail_calls_; }
    std::uint64_t max_generated_index() const { return max_generated_; }

    /// Parses the family config format: one `f<k> = <spec>` entry per line,
    /// indices sequential from 1, optional final `rest = suffix_binary`,
    /// `#` comments and blank lines ignored.
    static Family parse(std::string_view text) {
        std::vector<SelectionSpec> specs;
        TailRule tail = TailRule::None;
        std::size_t lineno = 0;
        std::string_view rest = text;
        while (!rest.empty()) {
            const auto nl = rest.find('\n');
            std::string_view line = detail::trim(rest.substr(0, nl));
            rest = (nl == std::string_view::npos) ? std::string_view{} : rest.substr(nl + 1);
            ++lineno;
            if (line.empty() || line.front() == '#') continue;
            const auto where = [&] { return "family file line " + std::to_string(lineno) + ": "; };
            if (tail != TailRule::None) throw ConfigError(where() + "'rest' must be the last entry");
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(where() + "expected '<name> = <value>'");
            const std::string_view key = detail::trim(line.substr(0, eq));
            const std::string_view value = detail::trim(line.substr(eq + 1));
            if (key == "rest") {
                if (value != "suffix_binary")
                    throw ConfigError(where() + "unknown tail rule '" + std::string(value) + "'");
                tail = TailRule::SuffixBinary;
                continue;
            }
            if (key.size() < 2 || key.front() != 'f')
                throw ConfigError(where() + "expected 'f<k>' or 'rest', got '" + std::string(key) + "'");
            const std::uint64_t k = detail::parse_uint(key.substr(1), "family index");
            if (k != specs.size() + 1)
                throw ConfigError(where() + "family indices must be sequential; expected f" +
                                  std::to_string(specs.size() + 1) + ", got f" + std::to_string(k));
            try {
                specs.push_back(SelectionSpec::parse(value));
            } catch (const ConfigError& e) {
                throw ConfigError(where() + e.what());
            }
        }
        return Family(std::move(specs), tail);
    }

    static Family load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open family file '" + path.string() + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    /// Canonical config-file form of this family.
    std::string config_text() const {
        std::string out;
        for (std::size_t i = 0; i < explicit_.size(); ++i)
            out += "f" + std::to_string(i + 1) + " = " + explicit_[i].name() + "\n";
        if (!is_finite()) out += "rest = suffix_binary\n";
        return out;
    }

private:
    std::vector<SelectionSpec> explicit_;
    TailRule tail_;
    mutable std::unordered_map<std::uint64_t, SelectionSpec> tail_cache_;
    mutable std::uint64_t tail_calls_ = 0;
    mutable std::uint64_t max_generated_ = 0;
};

/// Membership test for the stage-n caring set: does f_index care about the
/// prefix? Throws UndefinedIndexError for indices the family does not define.
inline Decision family_decide(const Family& family, std::uint64_t index, BitSpan prefix) {
    return evaluate(family.spec_at(index), prefix);
}

inline Decision family_decide(const Family& family, std::uint64_t index, const BitVec& prefix) {
    return family_decide(family, index, span_of(prefix));
}

inline const std::vector<std::string>& builtin_family_names() {
    static const std::vector<std::string> names = {"always-only", "two-fn", "mixed-5", "infinite"};
    return names;
}

/// Named families pinned for reproducible runs.
inline Family builtin_family(std::string_view name) {
    auto mixed5 = [] {
        return std::vector<SelectionSpec>{
            SelectionSpec::always(),       SelectionSpec::last_bit(1), SelectionSpec::contains_one(),
            SelectionSpec::periodic(3, 0), SelectionSpec::suffix("01"),
        };
    };
    if (name == "always-only") return Family({SelectionSpec::always()});
    if (name == "two-fn") return Family({SelectionSpec::always(), SelectionSpec::last_bit(1)});
    if (name == "mixed-5") return Family(mixed5());
    if (name == "infinite") return Family(mixed5(), Family::TailRule::SuffixBinary);
    throw ConfigError("unknown builtin family '" + std::string(name) + "'");
}

struct CatalogEntry {
    std::string form;
    std::string semantics;
};

/// Every selection-spec kind with its parameter shape and one-line semantics,
/// in a stable order.
inline const std::vector<CatalogEntry>& selection_catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"always", "cares about every prefix"},
        {"last_bit(b)", "cares iff the prefix is nonempty and its last bit is b"},
        {"contains_one", "cares iff 1 appears somewhere in the prefix"},
        {"suffix(p)", "cares iff the prefix ends with the bit pattern p"},
        {"periodic(k,r)", "cares iff the prefix length is congruent to r mod k"},
        {"zeros_run(k)", "cares iff the prefix ends with at least k consecutive 0s"},
        {"majority_ones", "cares iff the prefix has strictly more 1s than 0s"},
    };
    return entries;
}

} // namespace ville
