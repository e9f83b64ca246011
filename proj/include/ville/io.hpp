#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ville/analysis.hpp"
#include "ville/bits.hpp"
#include "ville/construction.hpp"
#include "ville/errors.hpp"

namespace ville {

enum class OutputFormat : std::uint8_t { Text01, PackedBits, Csv };

inline OutputFormat parse_format(std::string_view name) {
    if (name == "text") return OutputFormat::Text01;
    if (name == "packed") return OutputFormat::PackedBits;
    if (name == "csv") return OutputFormat::Csv;
    throw ConfigError("unknown output format '" + std::string(name) + "' (expected text, packed or csv)");
}

/// One line of '0'/'1' characters; an empty sequence encodes to zero bytes.
inline void write_text01(std::ostream& out, const BitVec& bits) {
    if (bits.empty()) return;
    std::string line(bits.size(), '0');
    for (std::uint64_t i = 0; i < bits.size(); ++i) line[i] = char('0' + bits[i]);
    out << line << '\n';
}

/// Eight bits per byte, first bit in the most significant position, final
/// byte zero-padded.
inline std::vector<std::uint8_t> encode_packed(const BitVec& bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::uint64_t i = 0; i < bits.size(); ++i)
        bytes[i / 8] |= std::uint8_t(bits[i] << (7 - i % 8));
    return bytes;
}

inline BitVec decode_packed(std::span<const std::uint8_t> bytes, std::uint64_t bit_count) {
    if (bit_count > bytes.size() * 8) throw ConfigError("packed data too short for requested bit count");
    BitVec bits;
    bits.reserve(bit_count);
    for (std::uint64_t i = 0; i < bit_count; ++i)
        bits.push_back((bytes[i / 8] >> (7 - i % 8)) & 1);
    return bits;
}

inline void write_packed(std::ostream& out, const BitVec& bits) {
    const auto bytes = encode_packed(bits);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

inline void write_bits_csv(std::ostream& out, const BitVec& bits) {
    out << "n,bit\n";
    for (std::uint64_t i = 0; i < bits.size(); ++i) out << (i + 1) << ',' << bits[i] << '\n';
}

inline void write_bits(std::ostream& out, const BitVec& bits, OutputFormat format) {
    switch (format) {
    case OutputFormat::Text01: write_text01(out, bits); break;
    case OutputFormat::PackedBits: write_packed(out, bits); break;
    case OutputFormat::Csv: write_bits_csv(out, bits); break;
    }
}

/// Reads a text01 stream: '0'/'1' characters, whitespace ignored.
inline BitVec read_text01(std::istream& in) {
    BitVec bits;
    char c;
    while (in.get(c)) {
        if (c == '0' || c == '1') bits.push_back(c - '0');
        else if (c != '\n' && c != '\r' && c != ' ' && c != '\t')
            throw ConfigError(std::string("unexpected character '") + c + "' in bit input");
    }
    return bits;
}

inline BitVec read_text01_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open bit input '" + path.string() + "'");
    return read_text01(in);
}

inline std::string format_active_set(const ActiveSet& active) {
    std::string out;
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (i > 0) out += ';';
        out += std::to_string(active[i]);
    }
    return out;
}

inline void write_trace_csv(std::ostream& out, std::span<const StageRecord> trace) {
    out << "n,cutoff,witness,active_set,bit\n";
    for (const StageRecord& r : trace)
        out << r.n << ',' << r.cutoff << ',' << r.witness << ',' << format_active_set(r.active) << ',' << r.bit
            << '\n';
}

/// Per-selection CSV: one row per selected stage, running sum and 2*delta in
/// exact integers.
inline void write_selection_csv(std::ostream& out, const SelectionTrace& tr) {
    out << "m,n_m,bit,S_l,two_delta\n";
    std::uint64_t sum = 0;
    for (std::uint64_t m = 1; m <= tr.count(); ++m) {
        const int bit = tr.selected[m - 1];
        sum += std::uint64_t(bit);
        const std::int64_t two_delta = 2 * std::int64_t(sum) - std::int64_t(m);
        out << m << ',' << tr.positions[m - 1] << ',' << bit << ',' << sum << ',' << two_delta << '\n';
    }
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Summary CSV across selections: one row per (index, dyadic checkpoint) with
/// the per-index extrema and fitted exponent repeated on each row, plus the
/// iterated-logarithm comparison column at eps' = 0.5.
inline void write_summary_csv(std::ostream& out, std::span<const ConvergenceReport> conv,
                              std::span<const FluctuationReport> fluct) {
    out << "l,m,abs_deviation,min_two_delta_so_far,min_two_delta,max_two_delta,fitted_exponent,lil_half\n";
    for (std::size_t i = 0; i < conv.size() && i < fluct.size(); ++i) {
        const ConvergenceReport& c = conv[i];
        const FluctuationReport& f = fluct[i];
        for (std::size_t j = 0; j < c.checkpoints.size(); ++j) {
            const auto& cp = c.checkpoints[j];
            out << c.index << ',' << cp.m << ',' << format_double(cp.abs_deviation) << ',';
            if (j < f.envelope.size()) out << f.envelope[j].second;
            out << ',' << f.min_two_delta << ',' << f.max_two_delta << ',';
            if (f.fitted_exponent) out << format_double(*f.fitted_exponent);
            out << ',';
            if (cp.m >= 3) out << format_double(lil_curve(cp.m, 0.5));
            out << '\n';
        }
    }
}

/// Writes through a temp file in the target directory, then renames, so
/// readers never observe a partially written file.
inline void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& producer) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::path tmp = dir / (path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        producer(out);
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ConfigError("failed while writing '" + path.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

} // namespace ville
