#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ville {

/// Append-only packed bit sequence. Bit i (0-based) of a built run is the
/// stage bit q(i+1) in 1-based stage terms.
class BitVec {
public:
    BitVec() = default;

    void reserve(std::uint64_t bits) { words_.reserve((bits + 63) / 64); }

    void push_back(int bit) {
        assert(bit == 0 || bit == 1);
        const std::uint64_t offset = nbits_ % 64;
        if (offset == 0) words_.push_back(0);
        words_.back() |= std::uint64_t(bit) << offset;
        ++nbits_;
    }

    int operator[](std::uint64_t i) const {
        assert(i < nbits_);
        return int((words_[i / 64] >> (i % 64)) & 1u);
    }

    std::uint64_t size() const { return nbits_; }
    bool empty() const { return nbits_ == 0; }

    /// Number of ones among the first `len` bits.
    std::uint64_t count_ones(std::uint64_t len) const {
        assert(len <= nbits_);
        std::uint64_t total = 0;
        const std::uint64_t full = len / 64, rest = len % 64;
        for (std::uint64_t w = 0; w < full; ++w) total += std::uint64_t(std::popcount(words_[w]));
        if (rest != 0) total += std::uint64_t(std::popcount(words_[full] & ((std::uint64_t(1) << rest) - 1)));
        return total;
    }
    std::uint64_t count_ones() const { return count_ones(nbits_); }

    /// True when any of the first `len` bits is 1.
    bool has_one(std::uint64_t len) const {
        assert(len <= nbits_);
        const std::uint64_t full = len / 64, rest = len % 64;
        for (std::uint64_t w = 0; w < full; ++w)
            if (words_[w] != 0) return true;
        return rest != 0 && (words_[full] & ((std::uint64_t(1) << rest) - 1)) != 0;
    }

    // Unused high bits of the last word are always zero, so word-wise
    // equality is sequence equality.
    friend bool operator==(const BitVec&, const BitVec&) = default;

    static BitVec from_string(std::string_view s) {
        BitVec v;
        v.reserve(s.size());
        for (char c : s) {
            if (c != '0' && c != '1') throw std::invalid_argument("bit string may contain only '0' and '1'");
            v.push_back(c - '0');
        }
        return v;
    }

    std::string to_string() const {
        std::string s(nbits_, '0');
        for (std::uint64_t i = 0; i < nbits_; ++i) s[i] = char('0' + (*this)[i]);
        return s;
    }

private:
    std::vector<std::uint64_t> words_;
    std::uint64_t nbits_ = 0;
};

/// Read-only view of the first `len` bits of a BitVec.
struct BitSpan {
    const BitVec* vec = nullptr;
    std::uint64_t len = 0;

    int operator[](std::uint64_t i) const {
        assert(i < len);
        return (*vec)[i];
    }
    std::uint64_t size() const { return len; }
    bool empty() const { return len == 0; }
    std::uint64_t count_ones() const { return vec == nullptr ? 0 : vec->count_ones(len); }
    bool has_one() const { return vec != nullptr && vec->has_one(len); }
};

inline BitSpan prefix_of(const BitVec& v, std::uint64_t len) {
    assert(len <= v.size());
    return BitSpan{&v, len};
}

inline BitSpan span_of(const BitVec& v) { return BitSpan{&v, v.size()}; }

} // namespace ville
