#include <catch_amalgamated.hpp>

#include "oracle.hpp"
#include "ville/analysis.hpp"
#include "ville/driver.hpp"

using namespace ville;

TEST_CASE("build: always-only family emits the alternating sequence", "[driver]") {
    const auto res = build({builtin_family("always-only"), 6, ThresholdRule::exp_base(3)});
    CHECK(res.bits.to_string() == "010101");
}

TEST_CASE("build: two-function family, hand-simulated prefix", "[driver]") {
    const auto res = build({builtin_family("two-fn"), 7, ThresholdRule::exp_base(3)});
    CHECK(res.bits.to_string() == "0101001");
}

TEST_CASE("build: zero length yields an empty sequence", "[driver]") {
    const auto res = build({builtin_family("mixed-5"), 0, ThresholdRule::exp_base(3)});
    CHECK(res.bits.empty());
    CHECK(res.trace.empty());
}

TEST_CASE("build: first bit is always 0", "[driver]") {
    for (const char* name : {"always-only", "two-fn", "mixed-5", "infinite"}) {
        const auto res = build({builtin_family(name), 1, ThresholdRule::exp_base(3)});
        REQUIRE(res.bits.size() == 1);
        CHECK(res.bits[0] == 0);
    }
}

TEST_CASE("build_finite: stage rule without cutoffs", "[driver]") {
    CHECK(build_finite(builtin_family("always-only"), 6).to_string() == "010101");
    CHECK(build_finite(builtin_family("two-fn"), 7).to_string() == "0100110");
    CHECK(build_finite(builtin_family("mixed-5"), 1).to_string() == "0");
    CHECK_THROWS_AS(build_finite(builtin_family("infinite"), 5), ConfigError);
}

TEST_CASE("build_finite matches its naive oracle", "[driver][oracle]") {
    for (const char* name : {"always-only", "two-fn", "mixed-5"}) {
        const Family fam = builtin_family(name);
        CHECK(build_finite(fam, 2000) == ville_test::oracle_build_finite(fam, 2000));
    }
}

TEST_CASE("stream: step-by-step equals build", "[driver]") {
    const RunConfig cfg{builtin_family("mixed-5"), 500, ThresholdRule::exp_base(3), TraceRetention::Full};
    const auto whole = build(cfg);

    Builder gen(cfg);
    for (std::uint64_t n = 0; n < cfg.length; ++n) {
        const StageRecord rec = gen.step();
        REQUIRE(rec == whole.trace[n]);
        REQUIRE(rec.bit == whole.bits[n]);
    }
    CHECK(gen.bits() == whole.bits);
}

TEST_CASE("stream: early stop and fresh restart reproduce the prefix", "[driver]") {
    const RunConfig cfg{builtin_family("two-fn"), 100, ThresholdRule::exp_base(3)};
    Builder first(cfg);
    std::vector<int> first_bits;
    for (int i = 0; i < 3; ++i) first_bits.push_back(first.step().bit);

    Builder second(cfg);
    for (int i = 0; i < 3; ++i) REQUIRE(second.step().bit == first_bits[i]);
}

TEST_CASE("determinism: identical configs, identical output", "[driver]") {
    for (const char* name : {"two-fn", "infinite"}) {
        const RunConfig cfg{builtin_family(name), 4096, ThresholdRule::exp_base(3)};
        CHECK(build(cfg).bits == build(cfg).bits);
    }
}

TEST_CASE("prefix stability: longer runs extend shorter ones", "[driver]") {
    const auto small = build({builtin_family("mixed-5"), 1000, ThresholdRule::exp_base(3)});
    const auto large = build({builtin_family("mixed-5"), 2500, ThresholdRule::exp_base(3)});
    for (std::uint64_t i = 0; i < small.bits.size(); ++i) REQUIRE(small.bits[i] == large.bits[i]);
}

TEST_CASE("trace retention", "[driver]") {
    const RunConfig none{builtin_family("two-fn"), 64, ThresholdRule::exp_base(3), TraceRetention::None};
    const RunConfig full{builtin_family("two-fn"), 64, ThresholdRule::exp_base(3), TraceRetention::Full};
    CHECK(build(none).trace.empty());
    CHECK(build(full).trace.size() == 64);
}

TEST_CASE("half bound holds exactly on every builtin run", "[driver][property]") {
    for (const char* name : {"always-only", "two-fn", "mixed-5", "infinite"}) {
        const auto res = build({builtin_family(name), 10000, ThresholdRule::exp_base(3)});
        REQUIRE(verify_half_bound(res.bits).passed());
    }
}

TEST_CASE("finite-family bound holds for sizes 1 through 4", "[driver][property]") {
    const std::vector<SelectionSpec> pool = {SelectionSpec::always(), SelectionSpec::last_bit(1),
                                             SelectionSpec::contains_one(), SelectionSpec::periodic(3, 0)};
    for (std::size_t k = 1; k <= pool.size(); ++k) {
        const Family fam(std::vector<SelectionSpec>(pool.begin(), pool.begin() + k));
        const BitVec q = build_finite(fam, 10000);
        REQUIRE(verify_finite_bound(q, fam).passed());
    }
}

TEST_CASE("runs under bases 4 and 8 match the oracle", "[driver][oracle]") {
    for (std::uint32_t base : {4u, 8u}) {
        const Family fam = builtin_family("mixed-5");
        const ThresholdRule rule = ThresholdRule::exp_base(base);
        const auto fast = build({fam, 1200, rule, TraceRetention::Full});
        const auto slow = ville_test::oracle_build(fam, 1200, rule);
        REQUIRE(fast.bits == slow.bits);
        for (std::size_t i = 0; i < slow.records.size(); ++i) REQUIRE(fast.trace[i] == slow.records[i]);
    }
}

TEST_CASE("run stats: cutoff histogram accounts for every stage", "[driver]") {
    const auto res = build({builtin_family("mixed-5"), 5000, ThresholdRule::exp_base(3)});
    std::uint64_t total = 0;
    for (const auto& [level, count] : res.stats.cutoff_histogram) total += count;
    CHECK(total == 5000);
    CHECK(res.stats.cutoff_histogram.at(1) == 4); // base 3: level 1 hosts exactly 4 stages
    CHECK(res.stats.laziness_violations == 0);
}
