#include <catch_amalgamated.hpp>

#include <cmath>

#include "ville/analysis.hpp"
#include "ville/driver.hpp"

using namespace ville;

TEST_CASE("running_sums", "[analysis]") {
    const auto s = running_sums(BitVec::from_string("0101"));
    CHECK(s == std::vector<std::uint64_t>{0, 0, 1, 1, 2});
    const auto zeros = running_sums(BitVec::from_string("0000"));
    for (auto v : zeros) CHECK(v == 0);

    const auto run = running_sums(BitVec::from_string("0101001"));
    CHECK(run.back() == 3);
    for (std::size_t n = 1; n < run.size() + 1; ++n) CHECK(2 * run[n - 1] <= n);
}

TEST_CASE("verify_half_bound", "[analysis]") {
    const auto res = build({builtin_family("two-fn"), 2000, ThresholdRule::exp_base(3)});
    CHECK(verify_half_bound(res.bits).passed());

    const auto bad = verify_half_bound(BitVec::from_string("1"));
    CHECK(bad.failed());
    CHECK(bad.violation_at == 2);

    CHECK(verify_half_bound(BitVec::from_string("0011")).passed());
    CHECK(verify_half_bound(BitVec()).passed());
    CHECK(verify_half_bound(BitVec::from_string("0110")).failed()); // prefix 011
}

TEST_CASE("verify_alternation", "[analysis]") {
    auto run = build({builtin_family("mixed-5"), 3000, ThresholdRule::exp_base(3), TraceRetention::Full});
    CHECK(verify_alternation(run.trace).passed());

    SECTION("fresh set must open with 0") {
        auto forged = run.trace;
        forged.push_back({3001, 9, 1, {1, 9}, 1}); // first occurrence emitting 1
        const auto r = verify_alternation(forged);
        CHECK(r.failed());
        CHECK(r.violation_at == 3001);
    }
    SECTION("duplicate 0,0 for one set") {
        std::vector<StageRecord> forged = {{1, 1, 1, {1}, 0}, {2, 1, 1, {1}, 0}};
        CHECK(verify_alternation(forged).failed());
    }
}

TEST_CASE("verify_cutoff_budget", "[analysis]") {
    const ThresholdRule rule = ThresholdRule::exp_base(3);
    auto run = build({builtin_family("always-only"), 5000, ThresholdRule::exp_base(3), TraceRetention::Full});
    const auto rep = verify_cutoff_budget(run.trace, rule);
    CHECK(rep.result.passed());
    REQUIRE_FALSE(rep.rows.empty());
    CHECK(rep.rows.front().level == 1);
    CHECK(rep.rows.front().observed == 4); // hand trace: exactly 4 stages at level 1
    CHECK(rep.rows.front().budget == 4);   // 1 * (3 + 1)

    std::map<std::uint32_t, std::uint64_t> forged = {{1, 5}};
    CHECK(verify_cutoff_budget(forged, rule).result.failed());
}

TEST_CASE("select: always-care index selects everything", "[analysis]") {
    const auto run = build({builtin_family("two-fn"), 7, ThresholdRule::exp_base(3)});
    const auto tr = select(run.bits, builtin_family("two-fn"), 1);
    REQUIRE(tr.count() == 7);
    for (std::uint64_t m = 0; m < 7; ++m) {
        CHECK(tr.positions[m] == m + 1);
        CHECK(tr.selected[m] == run.bits[m]);
    }
    CHECK_FALSE(tr.finite_care);
}

TEST_CASE("select: last-bit index on the hand-simulated run", "[analysis]") {
    const BitVec q = BitVec::from_string("0101001");
    const auto tr = select(q, builtin_family("two-fn"), 2);
    CHECK(tr.positions == std::vector<std::uint64_t>{3, 5});
    CHECK(tr.selected.to_string() == "00");
}

TEST_CASE("select: majority_ones never cares on a construction output", "[analysis]") {
    const Family fam({SelectionSpec::always(), SelectionSpec::majority_ones()});
    const auto run = build({fam, 4000, ThresholdRule::exp_base(3)});
    const auto tr = select(run.bits, fam, 2);
    CHECK(tr.positions.empty());
    CHECK(tr.finite_care);
}

TEST_CASE("select: undefined index throws", "[analysis]") {
    const auto run = build({builtin_family("two-fn"), 16, ThresholdRule::exp_base(3)});
    CHECK_THROWS_AS(select(run.bits, builtin_family("two-fn"), 3), UndefinedIndexError);
}

TEST_CASE("cross-check: retained trace equals fresh family evaluation", "[analysis]") {
    const Family fam = builtin_family("infinite");
    auto run = build({fam, 3000, ThresholdRule::exp_base(3), TraceRetention::Full});
    CHECK(cross_check_trace(run.trace, run.bits, fam).passed());

    auto forged = run.trace;
    forged[100].active = {1, 2, 3};
    forged[100].cutoff = 3;
    forged[100].witness = 1;
    CHECK(cross_check_trace(forged, run.bits, fam).failed());
}

TEST_CASE("delta step law: selected running deviation moves by one half", "[analysis][property]") {
    const auto run = build({builtin_family("mixed-5"), 2000, ThresholdRule::exp_base(3)});
    for (std::uint64_t l = 1; l <= 5; ++l) {
        const auto tr = select(run.bits, builtin_family("mixed-5"), l);
        std::int64_t td = 0;
        for (std::uint64_t m = 1; m <= tr.count(); ++m) {
            const std::int64_t next = td + (tr.selected[m - 1] ? 1 : -1);
            REQUIRE(std::abs(next - td) == 1); // |2 delta(m) - 2 delta(m-1)| = 1
            td = next;
        }
    }
}

TEST_CASE("zeta blocks: always-care index over a long run", "[analysis]") {
    const ThresholdRule rule = ThresholdRule::exp_base(3);
    auto run = build({builtin_family("two-fn"), 100000, rule, TraceRetention::Full});
    const auto zb = zeta_blocks(run.trace, run.bits, builtin_family("two-fn"), 1);

    REQUIRE(zb.stabilization.has_value());
    CHECK(*zb.stabilization == 1);
    CHECK(zb.head_length == 0); // f1's tail is the whole sequence
    REQUIRE(zb.blocks.size() >= 3);
    CHECK(zb.blocks.front().value == 1);

    // Block boundaries sit at first occurrences of successive cutoff values.
    for (std::size_t b = 1; b < zb.blocks.size(); ++b) {
        const auto& blk = zb.blocks[b];
        CHECK(blk.value == zb.blocks[b - 1].value + 1);
        CHECK(zb.zeta[blk.begin] == blk.value);
        for (std::uint64_t i = 0; i < blk.begin; ++i) CHECK(zb.zeta[i] != blk.value);
    }

    CHECK(verify_block_facts(zb, rule).passed());
    CHECK(verify_deficit_bounds(zb).passed());

    // The one-ratio at boundaries stays at most 1/2 for the always-care
    // index and approaches it from below.
    const auto last_ratio = zb.boundary_ratio(zb.blocks.size() - 1);
    REQUIRE(last_ratio.has_value());
    CHECK(*last_ratio <= 0.5);
    CHECK(*last_ratio > 0.45);
    CHECK_FALSE(zb.boundary_ratio(0).has_value());
    CHECK_FALSE(zb.boundary_ratio(zb.blocks.size()).has_value());
}

TEST_CASE("zeta blocks: selective index in the two-function family", "[analysis]") {
    const ThresholdRule rule = ThresholdRule::exp_base(3);
    auto run = build({builtin_family("two-fn"), 100000, rule, TraceRetention::Full});
    const auto zb = zeta_blocks(run.trace, run.bits, builtin_family("two-fn"), 2);
    REQUIRE(zb.stabilization.has_value());
    CHECK(*zb.stabilization >= 2);
    CHECK(verify_deficit_bounds(zb).passed());
}

TEST_CASE("block facts: forged shortfall fails", "[analysis]") {
    ZetaBlocks zb;
    zb.index = 1;
    zb.stabilization = 1;
    zb.blocks.push_back({1, 0, 2, 2, 1, 1, 1, true}); // only 2 occurrences of level 1, needs 3
    zb.blocks.push_back({2, 2, 1, 1, 1, 1, 0, false});
    CHECK(verify_block_facts(zb, ThresholdRule::exp_base(3)).failed());
}

TEST_CASE("block facts: inconclusive without a completed block", "[analysis]") {
    auto run = build({builtin_family("always-only"), 3, ThresholdRule::exp_base(3), TraceRetention::Full});
    const auto zb = zeta_blocks(run.trace, run.bits, builtin_family("always-only"), 1);
    const auto r = verify_block_facts(zb, ThresholdRule::exp_base(3));
    CHECK(r.status == CheckStatus::Inconclusive);
}

TEST_CASE("deficit bounds: forged unmatched ones fail", "[analysis]") {
    ZetaBlocks zb;
    zb.index = 1;
    zb.stabilization = 1;
    zb.head_length = 0;
    // First block claims more ones than zeros with an empty head: N1 = N0 + p + 1.
    zb.blocks.push_back({1, 0, 7, 7, 2, 3, 4, true});
    zb.blocks.push_back({2, 7, 1, 1, 1, 1, 0, false});
    CHECK(verify_deficit_bounds(zb).failed());
}

TEST_CASE("convergence report on a mid-sized run", "[analysis]") {
    const auto run = build({builtin_family("two-fn"), 1 << 16, ThresholdRule::exp_base(3)});
    const auto tr = select(run.bits, builtin_family("two-fn"), 1);
    const auto rep = convergence_report(tr);
    REQUIRE_FALSE(rep.checkpoints.empty());
    CHECK(rep.checkpoints.back().m == (1u << 16));
    CHECK(rep.final_deviation <= 0.05);
    CHECK_FALSE(rep.finite_care);

    // delta_1 <= 0 at every checkpoint: the half bound in selected terms.
    for (const auto& cp : rep.checkpoints) CHECK(cp.two_delta <= 0);
}

TEST_CASE("convergence report flags finite care as exempt", "[analysis]") {
    const Family fam({SelectionSpec::always(), SelectionSpec::majority_ones()});
    const auto run = build({fam, 2048, ThresholdRule::exp_base(3)});
    const auto rep = convergence_report(select(run.bits, fam, 2));
    CHECK(rep.finite_care);
    CHECK(rep.checkpoints.empty());
}

TEST_CASE("fluctuation report: delta_1 peaks at exactly zero", "[analysis]") {
    const auto run = build({builtin_family("mixed-5"), 1 << 14, ThresholdRule::exp_base(3)});
    const auto rep = fluctuation_report(select(run.bits, builtin_family("mixed-5"), 1), ThresholdRule::exp_base(3));
    CHECK(rep.max_two_delta == 0);
    CHECK(rep.min_two_delta < 0);
    CHECK(rep.argmin_m > 0);
    REQUIRE(rep.target_exponent.has_value());
    CHECK(*rep.target_exponent == Catch::Approx(std::log(2.0) / std::log(3.0)));
    REQUIRE(rep.fitted_exponent.has_value());
    CHECK(*rep.fitted_exponent <= *rep.target_exponent + 0.1);
}

TEST_CASE("fluctuation report: flat envelope when few negative checkpoints", "[analysis]") {
    SelectionTrace tr;
    tr.index = 1;
    tr.run_length = 2;
    tr.positions = {1, 2};
    tr.selected = BitVec::from_string("01");
    const auto rep = fluctuation_report(tr, ThresholdRule::exp_base(3));
    CHECK_FALSE(rep.fitted_exponent.has_value()); // fewer than 3 usable checkpoints
    CHECK(rep.max_two_delta == 0);
    CHECK(rep.min_two_delta == -1);
}

TEST_CASE("lil_curve", "[analysis]") {
    CHECK(lil_curve(16, 0.0) == Catch::Approx(2.8563).margin(5e-4));
    CHECK(lil_curve(100, 1.0) == 0.0);
    CHECK(lil_curve(1000000, 1.0) == 0.0);
    double prev = lil_curve(16, 0.5);
    for (std::uint64_t n = 17; n <= 64; ++n) {
        const double cur = lil_curve(n, 0.5);
        CHECK(cur > prev);
        prev = cur;
    }
    CHECK_THROWS_AS(lil_curve(2, 0.5), std::domain_error);
    CHECK_THROWS_AS(lil_curve(100, 1.5), std::domain_error);
    CHECK_THROWS_AS(lil_curve(100, -0.1), std::domain_error);
}

TEST_CASE("verify_finite_bound rejects forged sequences", "[analysis]") {
    const Family fam = builtin_family("two-fn");
    // An all-ones sequence immediately violates S <= m/2 for f1.
    CHECK(verify_finite_bound(BitVec::from_string("111"), fam).failed());
    CHECK_THROWS_AS(verify_finite_bound(BitVec::from_string("0"), builtin_family("infinite")), ConfigError);
}
