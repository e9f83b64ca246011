// Command-line front end: build witness sequences, verify their invariants,
// emit per-selection analysis CSVs, list the selection catalog.
//
// Exit codes: 0 success / all checks pass, 1 at least one check failed,
// 2 invalid configuration.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ville/ville.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

ville::Family resolve_family(const std::string& arg) {
    const auto& names = ville::builtin_family_names();
    if (std::find(names.begin(), names.end(), arg) != names.end()) return ville::builtin_family(arg);
    if (!std::filesystem::exists(arg))
        throw ville::ConfigError("family '" + arg + "' is neither a builtin name nor a readable file");
    return ville::Family::load(arg);
}

ville::ThresholdRule resolve_threshold(const std::string& arg) {
    if (arg.rfind("exp:", 0) == 0) {
        const std::string num = arg.substr(4);
        std::uint64_t r = 0;
        for (char c : num) {
            if (c < '0' || c > '9') throw ville::ConfigError("bad threshold base '" + num + "'");
            r = r * 10 + std::uint64_t(c - '0');
            if (r > 1u << 20) throw ville::ConfigError("threshold base '" + num + "' out of range");
        }
        return ville::ThresholdRule::exp_base(std::uint32_t(r));
    }
    if (arg.rfind("table:", 0) == 0) return ville::ThresholdRule::load_table(arg.substr(6));
    throw ville::ConfigError("threshold must be 'exp:<r>' or 'table:<path>', got '" + arg + "'");
}

void write_output(const std::optional<std::string>& out_path, const std::function<void(std::ostream&)>& producer) {
    if (out_path) {
        ville::atomic_write(*out_path, producer);
    } else {
        producer(std::cout);
    }
}

struct BuildArgs {
    std::string family;
    std::uint64_t length = 0;
    std::string threshold = "exp:3";
    std::string format = "text";
    std::optional<std::string> out;
    std::optional<std::string> trace;
};

int cmd_build(const BuildArgs& args) {
    const ville::OutputFormat format = ville::parse_format(args.format);
    ville::RunConfig cfg{resolve_family(args.family), args.length, resolve_threshold(args.threshold),
                         args.trace ? ville::TraceRetention::Full : ville::TraceRetention::None};
    const ville::BuildResult result = ville::build(cfg);
    write_output(args.out, [&](std::ostream& out) { ville::write_bits(out, result.bits, format); });
    if (args.trace)
        ville::atomic_write(*args.trace, [&](std::ostream& out) { ville::write_trace_csv(out, result.trace); });
    return kExitOk;
}

struct VerifyArgs {
    std::string family;
    std::uint64_t length = 0;
    std::string threshold = "exp:3";
    std::string checks; // comma list; empty = defaults
    std::optional<std::string> report;
    std::optional<std::string> input;
};

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names = {"half",   "alternation", "budget",      "blocks",
                                                   "deficit", "finite-bound", "convergence", "fluctuation"};
    return names;
}

struct ReportLine {
    std::string check;
    ville::CheckResult result;
};

int cmd_verify(const VerifyArgs& args) {
    std::vector<std::string> requested;
    if (!args.checks.empty()) {
        std::stringstream ss(args.checks);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            if (std::find(known_checks().begin(), known_checks().end(), item) == known_checks().end())
                throw ville::ConfigError("unknown check '" + item + "'");
            requested.push_back(item);
        }
        if (requested.empty()) throw ville::ConfigError("no checks requested");
    }

    std::vector<ReportLine> lines;

    if (args.input) {
        if (requested.empty()) requested = {"half"};
        for (const auto& c : requested)
            if (c != "half")
                throw ville::ConfigError("check '" + c + "' requires constructing a run; only 'half' works with --input");
        const ville::BitVec bits = ville::read_text01_file(*args.input);
        lines.push_back({"half", ville::verify_half_bound(bits)});
    } else {
        if (args.family.empty()) throw ville::ConfigError("--family is required unless --input is given");
        ville::Family family = resolve_family(args.family);
        const ville::ThresholdRule rule = resolve_threshold(args.threshold);
        if (requested.empty()) {
            requested = {"half", "alternation", "budget", "blocks", "deficit", "convergence", "fluctuation"};
            if (family.is_finite()) requested.push_back("finite-bound");
        }
        const auto wants = [&](const std::string& name) {
            return std::find(requested.begin(), requested.end(), name) != requested.end();
        };
        if (wants("finite-bound") && !family.is_finite())
            throw ville::ConfigError("check 'finite-bound' requires a finite family");

        const bool need_trace = wants("alternation") || wants("blocks") || wants("deficit");
        ville::RunConfig cfg{family, args.length, rule,
                             need_trace ? ville::TraceRetention::Full : ville::TraceRetention::None};
        const ville::BuildResult run = ville::build(cfg);

        // Selection traces are shared by deficit/convergence/fluctuation.
        std::vector<std::uint64_t> indices;
        for (std::uint64_t l = 1; l <= family.explicit_size(); ++l) indices.push_back(l);

        for (const std::string& check : requested) {
            if (check == "half") {
                lines.push_back({check, ville::verify_half_bound(run.bits)});
            } else if (check == "alternation") {
                lines.push_back({check, ville::verify_alternation(run.trace)});
            } else if (check == "budget") {
                lines.push_back({check, ville::verify_cutoff_budget(run.stats.cutoff_histogram, rule).result});
            } else if (check == "blocks") {
                const auto zb = ville::zeta_blocks(run.trace, run.bits, family, 1);
                lines.push_back({check, ville::verify_block_facts(zb, rule)});
            } else if (check == "deficit") {
                ville::CheckResult worst = ville::CheckResult::inconclusive("no index had a stabilized tail");
                for (std::uint64_t l : indices) {
                    const auto zb = ville::zeta_blocks(run.trace, run.bits, family, l);
                    const auto r = ville::verify_deficit_bounds(zb);
                    if (r.failed()) {
                        worst = ville::CheckResult::fail("f" + std::to_string(l) + ": " + r.detail, r.violation_at);
                        break;
                    }
                    if (r.passed() && !worst.failed())
                        worst = ville::CheckResult::pass("bounds held for every index with a stabilized tail");
                }
                lines.push_back({check, worst});
            } else if (check == "finite-bound") {
                const ville::BitVec finite_bits = ville::build_finite(family, args.length);
                lines.push_back({check, ville::verify_finite_bound(finite_bits, family)});
            } else if (check == "convergence") {
                ville::CheckResult res = ville::CheckResult::inconclusive("no index with infinite care reached 2 checkpoints");
                for (std::uint64_t l : indices) {
                    const auto tr = ville::select(run.bits, family, l);
                    if (tr.finite_care) continue;
                    const auto rep = ville::convergence_report(tr);
                    if (rep.checkpoints.size() < 2) continue;
                    if (rep.final_deviation > 0.05) {
                        res = ville::CheckResult::fail("f" + std::to_string(l) + ": final deviation " +
                                                       ville::format_double(rep.final_deviation) + " > 0.05");
                        break;
                    }
                    if (!rep.envelope_ok) {
                        res = ville::CheckResult::fail("f" + std::to_string(l) +
                                                       ": deviation envelope grew by more than 2x past m = 1024");
                        break;
                    }
                    if (!res.failed()) res = ville::CheckResult::pass("all infinite-care indices within 0.05 at the final checkpoint");
                }
                lines.push_back({check, res});
            } else if (check == "fluctuation") {
                const auto tr = ville::select(run.bits, family, 1);
                const auto rep = ville::fluctuation_report(tr, rule);
                if (rep.max_two_delta != 0) {
                    lines.push_back({check, ville::CheckResult::fail("max delta_1 is " +
                                                                     std::to_string(rep.max_two_delta) +
                                                                     "/2, expected exactly 0")});
                } else if (rep.fitted_exponent && rep.target_exponent &&
                           *rep.fitted_exponent > *rep.target_exponent + 0.1) {
                    lines.push_back({check, ville::CheckResult::fail("fitted envelope exponent " +
                                                                     ville::format_double(*rep.fitted_exponent) +
                                                                     " exceeds target " +
                                                                     ville::format_double(*rep.target_exponent) +
                                                                     " + 0.1")});
                } else {
                    std::string detail = "max delta_1 = 0";
                    if (rep.fitted_exponent)
                        detail += ", fitted exponent " + ville::format_double(*rep.fitted_exponent);
                    lines.push_back({check, ville::CheckResult::pass(detail)});
                }
            }
        }
    }

    std::ostringstream report;
    bool any_failed = false;
    for (const ReportLine& line : lines) {
        report << line.check << ": " << ville::to_string(line.result.status);
        if (!line.result.detail.empty()) report << " - " << line.result.detail;
        report << '\n';
        any_failed = any_failed || line.result.failed();
    }
    report << "overall: " << (any_failed ? "fail" : "pass") << '\n';

    std::cout << report.str();
    if (args.report)
        ville::atomic_write(*args.report, [&](std::ostream& out) { out << report.str(); });
    return any_failed ? kExitCheckFailed : kExitOk;
}

struct AnalyzeArgs {
    std::string family;
    std::uint64_t length = 0;
    std::string threshold = "exp:3";
    std::string select;
    std::string out_dir;
};

int cmd_analyze(const AnalyzeArgs& args) {
    ville::Family family = resolve_family(args.family);
    ville::RunConfig cfg{family, args.length, resolve_threshold(args.threshold), ville::TraceRetention::None};

    std::vector<std::uint64_t> indices;
    {
        std::stringstream ss(args.select);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            std::uint64_t v = 0;
            for (char c : item) {
                if (c < '0' || c > '9') throw ville::ConfigError("bad selection index '" + item + "'");
                v = v * 10 + std::uint64_t(c - '0');
            }
            indices.push_back(v);
        }
    }
    if (indices.empty()) throw ville::ConfigError("--select must list at least one index");
    for (std::uint64_t l : indices)
        if (!family.has_index(l))
            throw ville::ConfigError("family has no index " + std::to_string(l));

    const ville::BuildResult run = ville::build(cfg);
    std::filesystem::create_directories(args.out_dir);

    std::vector<ville::ConvergenceReport> conv;
    std::vector<ville::FluctuationReport> fluct;
    for (std::uint64_t l : indices) {
        const auto tr = ville::select(run.bits, family, l);
        ville::atomic_write(std::filesystem::path(args.out_dir) / ("sel_" + std::to_string(l) + ".csv"),
                            [&](std::ostream& out) { ville::write_selection_csv(out, tr); });
        conv.push_back(ville::convergence_report(tr));
        fluct.push_back(ville::fluctuation_report(tr, cfg.rule));
    }
    ville::atomic_write(std::filesystem::path(args.out_dir) / "summary.csv",
                        [&](std::ostream& out) { ville::write_summary_csv(out, conv, fluct); });
    return kExitOk;
}

int cmd_catalog() {
    std::cout << "selection functions:\n";
    for (const auto& entry : ville::selection_catalog())
        std::cout << "  " << entry.form << "  -  " << entry.semantics << '\n';
    std::cout << "builtin families:\n";
    for (const auto& name : ville::builtin_family_names()) {
        const ville::Family f = ville::builtin_family(name);
        std::cout << "  " << name << ":";
        for (std::uint64_t i = 1; i <= f.explicit_size(); ++i) std::cout << ' ' << f.spec_at(i).name();
        if (!f.is_finite()) std::cout << " rest=suffix_binary";
        std::cout << '\n';
    }
    std::cout << "tail rule suffix_binary: index m cares iff the prefix ends with the binary digits of m\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ville - construct and verify sequences witnessing Ville's theorem"};
    app.require_subcommand(1);

    BuildArgs build_args;
    auto* build_cmd = app.add_subcommand("build", "construct a sequence and write it out");
    build_cmd->add_option("--family", build_args.family, "builtin family name or family file path")->required();
    build_cmd->add_option("--length", build_args.length, "number of stages to run")->required();
    build_cmd->add_option("--threshold", build_args.threshold, "exp:<r> or table:<path> (default exp:3)");
    build_cmd->add_option("--format", build_args.format, "text | packed | csv (default text)");
    std::string build_out, build_trace;
    build_cmd->add_option("--out", build_out, "output path (default stdout)");
    build_cmd->add_option("--trace", build_trace, "also write a per-stage CSV trace to this path");

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "construct a run and verify invariants");
    verify_cmd->add_option("--family", verify_args.family, "builtin family name or family file path");
    verify_cmd->add_option("--length", verify_args.length, "number of stages to run");
    verify_cmd->add_option("--threshold", verify_args.threshold, "exp:<r> or table:<path> (default exp:3)");
    verify_cmd->add_option("--checks", verify_args.checks,
                           "comma list of half,alternation,budget,blocks,deficit,finite-bound,convergence,fluctuation");
    std::string verify_report, verify_input;
    verify_cmd->add_option("--report", verify_report, "write the report to this path as well");
    verify_cmd->add_option("--input", verify_input, "verify a prebuilt text01 bit file instead of building");

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "emit per-selection CSV statistics");
    analyze_cmd->add_option("--family", analyze_args.family, "builtin family name or family file path")->required();
    analyze_cmd->add_option("--length", analyze_args.length, "number of stages to run")->required();
    analyze_cmd->add_option("--threshold", analyze_args.threshold, "exp:<r> or table:<path> (default exp:3)");
    analyze_cmd->add_option("--select", analyze_args.select, "comma list of family indices")->required();
    analyze_cmd->add_option("--out-dir", analyze_args.out_dir, "directory for the CSV files")->required();

    auto* catalog_cmd = app.add_subcommand("catalog", "list selection function kinds and builtin families");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (build_cmd->parsed()) {
            if (!build_out.empty()) build_args.out = build_out;
            if (!build_trace.empty()) build_args.trace = build_trace;
            return cmd_build(build_args);
        }
        if (verify_cmd->parsed()) {
            if (!verify_report.empty()) verify_args.report = verify_report;
            if (!verify_input.empty()) verify_args.input = verify_input;
            return cmd_verify(verify_args);
        }
        if (analyze_cmd->parsed()) return cmd_analyze(analyze_args);
        if (catalog_cmd->parsed()) return cmd_catalog();
    } catch (const ville::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
