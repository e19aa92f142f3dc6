#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "scbris/analytics.hpp"
#include "scbris/csv.hpp"
#include "scbris/montecarlo.hpp"

using namespace scbris;

namespace {

ScenarioConfig small_baseline(std::uint64_t trials = 2000) {
    auto cfg = baseline_scenario();
    cfg.trials = trials;
    return resolve_config(cfg);
}

std::string csv_of(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

}  // namespace

TEST(Engine, RunTrialIsDeterministic) {
    const auto cfg = small_baseline();
    const auto a = run_trial(cfg, 11), b = run_trial(cfg, 11);
    EXPECT_EQ(a.eff_gain, b.eff_gain);
    EXPECT_EQ(a.residue, b.residue);
    EXPECT_EQ(a.sinr, b.sinr);
    EXPECT_NE(a.eff_gain, run_trial(cfg, 12).eff_gain);
}

TEST(Engine, IdealResiduesVanishRelativeToInterference) {
    const auto cfg = small_baseline();
    const auto gains = compute_gains(cfg);
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto lm = run_trial(cfg, t);
        for (int m = 0; m < 2; ++m)
            for (int k = 0; k < 2; ++k) EXPECT_LE(lm.residue[lm.idx(m, k)], 1e-18 * gains.direct(m, k));
    }
}

TEST(Engine, ResultIndependentOfThreadCountAndBlocking) {
    const auto cfg = small_baseline(3000);
    const std::vector<Metric> metrics = {Metric::OpUser, Metric::ErUser, Metric::OpPair, Metric::Se,
                                         Metric::Ee,     Metric::ResidueMean, Metric::FeasibilityRate,
                                         Metric::OpOma,  Metric::OpOmaPair};
    SweepSpec spec{"tx_power_dbm", {0.0, 10.0, 30.0}, metrics};
    EngineOptions one, many;
    many.threads = 4;
    many.block_size = 1024;
    one.block_size = 1024;
    const auto a = csv_of(run_sweep(cfg, spec, one));
    const auto b = csv_of(run_sweep(cfg, spec, many));
    EXPECT_EQ(a, b);
}

TEST(Engine, TargetRateExtremes) {
    auto cfg = small_baseline(500);
    cfg.target_rate = {0.0, 0.0};
    auto r = estimate(cfg, Metric::OpUser, 1, 2);
    EXPECT_EQ(r.estimate, 0.0);
    EXPECT_EQ(r.std_error, 0.0);
    cfg.target_rate = {0.5, 60.0};
    r = estimate(cfg, Metric::OpUser, 1, 2);
    EXPECT_EQ(r.estimate, 1.0);
    EXPECT_EQ(r.std_error, 0.0);
}

TEST(Engine, RequiresEnoughTrials) {
    auto cfg = small_baseline(99);
    EXPECT_THROW(estimate(cfg, Metric::OpUser, 1, 1), ConfigError);
}

TEST(Engine, ResultFieldsAreConsistent) {
    const auto cfg = small_baseline(1000);
    const auto r = estimate(cfg, Metric::ErUser, 2, 2);
    EXPECT_EQ(r.metric, "ER_user");
    EXPECT_EQ(r.trials, 1000u);
    EXPECT_NEAR(r.ci_low, r.estimate - 1.96 * r.std_error, 1e-12);
    EXPECT_NEAR(r.ci_high, r.estimate + 1.96 * r.std_error, 1e-12);
    EXPECT_EQ(r.fingerprint, config_fingerprint(cfg));
    EXPECT_EQ(r.failures, 0u);
}

TEST(Engine, SingleClusterMatchesClosedForm) {
    auto cfg = baseline_scenario();
    cfg.M = 1;
    cfg.L = 1;
    cfg.d_user = {{160.0, 80.0}};
    cfg.d_direct = {{200.0, 100.0}};
    cfg.trials = 20000;
    cfg.tx_power_dbm = 15.0;
    cfg = resolve_config(cfg);
    for (int k = 0; k < 2; ++k) {
        const auto r = estimate(cfg, Metric::OpUser, 1, k + 1);
        const double closed = op_closed_form(closed_form_inputs(cfg, 0, k), k);
        EXPECT_NEAR(r.estimate, closed, 3.0 * std::sqrt(closed * (1 - closed) / cfg.trials)) << k;
    }
}

TEST(Engine, SpectralEfficiencyIsSumOfRates) {
    const auto cfg = small_baseline(1000);
    const std::vector<Metric> ms = {Metric::ErUser, Metric::Se};
    const auto res = estimate(cfg, ms);
    double sum = 0.0, se = 0.0;
    for (const auto& r : res) {
        if (r.metric == "ER_user" && r.m == 1) sum += r.estimate;
        if (r.metric == "SE" && r.m == 1) se = r.estimate;
    }
    EXPECT_NEAR(se, sum, 1e-9);
}

TEST(Engine, PairOutageIsProductOfUserOutages) {
    auto cfg = baseline_scenario();
    cfg.L = 1;
    cfg.tx_power_dbm = 5.0;
    cfg.trials = 5000;
    cfg = resolve_config(cfg);
    const std::vector<Metric> ms = {Metric::OpUser, Metric::OpPair};
    const auto res = estimate(cfg, ms);
    double prod = 1.0, pair = -1.0, pair_se = 0.0;
    for (const auto& r : res) {
        if (r.metric == "OP_user" && r.m == 1) prod *= r.estimate;
        if (r.metric == "OP_pair" && r.m == 1) {
            pair = r.estimate;
            pair_se = r.std_error;
        }
    }
    EXPECT_NEAR(pair, prod, 1e-15);
    EXPECT_GT(pair_se, 0.0);
}

TEST(Engine, FeasibleOnlyConditionsStatistics) {
    const auto cfg = small_baseline(2000);
    EngineOptions opts;
    opts.feasible_only = true;
    const double p = cfg.tx_power_watt();
    const auto all = simulate_powers(cfg, std::span<const double>(&p, 1));
    const auto cond = simulate_powers(cfg, std::span<const double>(&p, 1), opts);
    EXPECT_EQ(all.front().n, 2000.0);
    EXPECT_EQ(cond.front().n, all.front().feasible);
    EXPECT_LT(cond.front().n, all.front().n);
}

TEST(Estimator, ConfidenceIntervalCoverage) {
    RandomStream rng(2024);
    const int reps = 200, n = 1000;
    int covered = 0;
    for (int r = 0; r < reps; ++r) {
        KahanSum s;
        for (int i = 0; i < n; ++i) s.add(rng.uniform() < 0.1 ? 1.0 : 0.0);
        const double p = s.value() / n;
        const auto res = make_result(Metric::OpUser, 1, 1, p, detail::proportion_se(p, n), n);
        if (res.ci_low <= 0.1 && 0.1 <= res.ci_high) ++covered;
    }
    const double coverage = static_cast<double>(covered) / reps;
    EXPECT_GE(coverage, 0.93);
    EXPECT_LE(coverage, 0.97);
}

TEST(Estimator, KahanSumIsCompensated) {
    KahanSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) s.add(1e-16);
    EXPECT_NEAR(s.value() - 1.0, 1e-13, 2.3e-16);
}

TEST(Sweep, PreservesOrderAndRecordsFailures) {
    const auto cfg = small_baseline(200);
    SweepSpec spec{"N", {40.0, 1.5, 16.0}, {Metric::FeasibilityRate}};
    const auto rows = run_sweep(cfg, spec);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].value, 40.0);
    EXPECT_TRUE(rows[0].error.empty());
    EXPECT_FALSE(rows[1].error.empty());
    EXPECT_EQ(rows[2].value, 16.0);
    EXPECT_TRUE(rows[2].error.empty());
    EXPECT_THROW(run_sweep(cfg, SweepSpec{"colour", {1.0}, {Metric::Se}}), ParseError);
    EXPECT_THROW(run_sweep(cfg, SweepSpec{"N", {}, {Metric::Se}}), DomainError);
}

TEST(Sweep, BitResolutionOrdering) {
    auto cfg = small_baseline(2000);
    SweepSpec spec{"resolution_bits", {3, 4, 5, 6}, {Metric::ResidueMean}};
    const auto rows = run_sweep(cfg, spec);
    double prev = INFINITY;
    for (const auto& r : rows) {
        if (r.result.m != 1 || r.result.k != 1) continue;
        EXPECT_LT(r.result.estimate, prev);
        prev = r.result.estimate;
        EXPECT_EQ(r.mode, std::to_string(static_cast<int>(r.value)) + "-bit");
    }
}

TEST(Csv, HeaderAndNumberFormat) {
    EXPECT_EQ(csv_number(0.1), "0.1");
    EXPECT_EQ(csv_number(1e-300), "1e-300");
    EXPECT_EQ(csv_number(30.0), "30");
    const auto cfg = small_baseline(100);
    const auto rows = run_sweep(cfg, SweepSpec{"tx_power_dbm", {30.0}, {Metric::FeasibilityRate}});
    const auto text = csv_of(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
    EXPECT_NE(text.find("tx_power_dbm,30,0,0,feasibility_rate,"), std::string::npos);
    EXPECT_NE(text.find(",ideal,aggregate,diffuse," + config_fingerprint(cfg)), std::string::npos);
}
