#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "scbris/channel.hpp"
#include "scbris/link_metrics.hpp"
#include "scbris/numerics.hpp"
#include "scbris/pathloss.hpp"
#include "scbris/random.hpp"
#include "scbris/validation.hpp"

using namespace scbris;

namespace {

double erlang_cdf(int s, double x) {
    if (x <= 0.0) return 0.0;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < s; ++j) {
        term *= x / j;
        sum += term;
    }
    return 1.0 - std::exp(-x) * sum;
}

}  // namespace

TEST(Random, SplitMixReferenceOutputs) {
    RandomStream rng(0);
    EXPECT_EQ(rng.next_u64(), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(rng.next_u64(), 0x6E789E6AA1B965F4ULL);
    EXPECT_EQ(rng.next_u64(), 0x06C45D188009454FULL);
}

TEST(Random, TrialStreamsAreDistinctAndReproducible) {
    EXPECT_EQ(trial_stream_key(1, 5), trial_stream_key(1, 5));
    EXPECT_NE(trial_stream_key(1, 5), trial_stream_key(1, 6));
    EXPECT_NE(trial_stream_key(1, 5), trial_stream_key(2, 5));
    auto a = trial_stream(9, 3), b = trial_stream(9, 3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Random, UniformRanges) {
    RandomStream rng(42);
    for (int i = 0; i < 100000; ++i) {
        const double u0 = rng.uniform_open0();
        const double u = rng.uniform();
        ASSERT_GT(u0, 0.0);
        ASSERT_LE(u0, 1.0);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Random, ComplexNormalMoments) {
    RandomStream rng(7);
    const int n = 200000;
    double p = 0.0;
    std::complex<double> mean = 0.0, pseudo = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = rng.complex_normal();
        p += std::norm(z);
        mean += z;
        pseudo += z * z;
    }
    EXPECT_NEAR(p / n, 1.0, 5 * 1.0 / std::sqrt(n));
    EXPECT_NEAR(std::abs(mean / double(n)), 0.0, 5 / std::sqrt(n));
    EXPECT_NEAR(std::abs(pseudo / double(n)), 0.0, 5 / std::sqrt(n));
}

TEST(Channel, RealizationShapesAndDeterminism) {
    const auto cfg = resolve_config(baseline_scenario());
    auto r1 = trial_stream(cfg.master_seed, 17);
    auto r2 = trial_stream(cfg.master_seed, 17);
    const auto a = draw_realization(cfg, r1);
    const auto b = draw_realization(cfg, r2);
    EXPECT_TRUE(a == b);
    EXPECT_EQ(a.H.rows(), cfg.N);
    EXPECT_EQ(a.H.cols(), cfg.M);
    ASSERT_EQ(a.W.size(), 4u);
    EXPECT_EQ(a.direct(1, 0).rows(), cfg.L);
    EXPECT_EQ(a.direct(1, 0).cols(), cfg.M);
    EXPECT_EQ(a.reflect(1, 1).rows(), cfg.L);
    EXPECT_EQ(a.reflect(1, 1).cols(), cfg.N);
    auto r3 = trial_stream(cfg.master_seed, 18);
    EXPECT_FALSE(a == draw_realization(cfg, r3));
}

TEST(Channel, RicianMeanAndPower) {
    RandomStream rng(3);
    const double k = 3.0;
    const int n = 100000;
    std::complex<double> mean = 0.0;
    double power = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = draw_rician_matrix(1, 1, k, rng)(0, 0);
        mean += z;
        power += std::norm(z);
    }
    EXPECT_NEAR(mean.real() / n, std::sqrt(k / (k + 1)), 0.01);
    EXPECT_NEAR(mean.imag() / n, 0.0, 0.01);
    EXPECT_NEAR(power / n, 1.0, 0.01);
}

TEST(Channel, RicianLimits) {
    RandomStream rng(4);
    const auto los = draw_rician_matrix(3, 2, std::numeric_limits<double>::infinity(), rng);
    EXPECT_TRUE(los.isApprox(CMatrix::Ones(3, 2)));
    RandomStream a(5), b(5);
    EXPECT_TRUE(draw_rician_matrix(3, 2, 0.0, a).isApprox(draw_rayleigh_matrix(3, 2, b)));
}

class EffectiveGainKs : public ::testing::TestWithParam<int> {};

TEST_P(EffectiveGainKs, GammaShapeL) {
    auto cfg = baseline_scenario();
    cfg.L = GetParam();
    cfg = resolve_config(cfg);
    const int n = 20000;
    std::vector<double> sample;
    for (int t = 0; t < n; ++t) {
        auto rng = trial_stream(cfg.master_seed + 1, static_cast<std::uint64_t>(t));
        sample.push_back(effective_gain(draw_realization(cfg, rng), 1, 1));
    }
    const int L = cfg.L;
    const double d = ks_statistic(sample, [L](double x) { return erlang_cdf(L, x); });
    EXPECT_LT(d, ks_critical_1pct(sample.size()));
    // A wrong shape must be rejected.
    const double wrong = ks_statistic(sample, [L](double x) { return erlang_cdf(L + 1, x); });
    EXPECT_GT(wrong, ks_critical_1pct(sample.size()));
}

INSTANTIATE_TEST_SUITE_P(ReceiveAntennas, EffectiveGainKs, ::testing::Values(1, 2, 4));

TEST(Ks, StatisticOnKnownSample) {
    // Uniform grid against its own CDF: D = 1/n.
    std::vector<double> s = {0.125, 0.375, 0.625, 0.875};
    EXPECT_NEAR(ks_statistic(s, [](double x) { return x; }), 0.125, 1e-15);
    EXPECT_THROW(ks_statistic({}, [](double x) { return x; }), DomainError);
}
