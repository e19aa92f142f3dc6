#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "scbris/beamforming.hpp"
#include "scbris/channel.hpp"
#include "scbris/pathloss.hpp"
#include "scbris/random.hpp"

using namespace scbris;

namespace {

struct Fixture {
    ScenarioConfig cfg;
    LargeScaleGains gains;
    ChannelRealization ch;
};

Fixture make(CancellationMode mode, int M = 2, std::uint64_t trial = 0, int N = 0) {
    Fixture f;
    auto c = baseline_scenario();
    c.cancellation_mode = mode;
    if (M != 2) {
        c.M = M;
        c.d_user.assign(static_cast<std::size_t>(M), {160.0, 80.0});
        c.d_direct.assign(static_cast<std::size_t>(M), {200.0, 100.0});
    }
    if (N > 0) {
        c.N = N;
        c.n_auto_factor.reset();
    }
    f.cfg = resolve_config(c);
    f.gains = compute_gains(f.cfg);
    auto rng = trial_stream(f.cfg.master_seed, trial);
    f.ch = draw_realization(f.cfg, rng);
    return f;
}

CVector random_phi(int n, std::uint64_t seed) {
    RandomStream rng(seed);
    CVector v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.complex_normal();
    return v;
}

double residue_total(const Fixture& f, const PassiveBeamforming& pb) {
    double total = 0.0;
    for (int m = 0; m < f.cfg.M; ++m)
        for (int k = 0; k < f.cfg.K; ++k) total += residue(f.ch, f.gains, pb, m, k, f.cfg.cancellation_mode);
    return total;
}

}  // namespace

TEST(Beamforming, AggregateSystemShape) {
    const auto f = make(CancellationMode::Aggregate);
    const auto sys = build_effective_matrix(f.ch, f.gains, f.cfg.cancellation_mode);
    EXPECT_EQ(sys.h_tilde.rows(), 8);
    EXPECT_EQ(sys.h_tilde.cols(), f.cfg.N);
    EXPECT_EQ(sys.b_target.size(), 8);
    ASSERT_EQ(sys.rows.size(), 8u);
    EXPECT_EQ(sys.rows[3].m, 0);
    EXPECT_EQ(sys.rows[3].k, 1);
    EXPECT_EQ(sys.rows[3].l, 1);
    // First row, first column by hand.
    const cplx expected = std::sqrt(f.gains.reflect(0, 0)) * f.ch.reflect(0, 0)(0, 0) * (f.ch.H(0, 0) + f.ch.H(0, 1));
    EXPECT_NEAR(std::abs(sys.h_tilde(0, 0) - expected), 0.0, 1e-25);
    const cplx b0 = -std::sqrt(f.gains.direct(0, 0)) * f.ch.direct(0, 0)(0, 1);
    EXPECT_NEAR(std::abs(sys.b_target(0) - b0), 0.0, 1e-25);
}

TEST(Beamforming, PerSymbolSystemShape) {
    const auto f = make(CancellationMode::PerSymbol, 3, 0, 80);
    const auto sys = build_effective_matrix(f.ch, f.gains, f.cfg.cancellation_mode);
    EXPECT_EQ(sys.h_tilde.rows(), 3 * 2 * 2 * 2);
    EXPECT_EQ(sys.rows[0].interferer, 1);
    EXPECT_EQ(sys.rows[1].interferer, 2);
}

TEST(Beamforming, SingleClusterHasNoTarget) {
    const auto f = make(CancellationMode::Aggregate, 1);
    const auto sys = build_effective_matrix(f.ch, f.gains, f.cfg.cancellation_mode);
    EXPECT_EQ(sys.b_target.size(), 0);
    EXPECT_EQ(sys.h_tilde.rows(), 0);
    const auto pb = solve_passive(sys, f.cfg.N);
    EXPECT_EQ(pb.phi.norm(), 0.0);
    EXPECT_TRUE(pb.exact);
    EXPECT_EQ(residue(f.ch, f.gains, pb, 0, 0), 0.0);
}

TEST(Beamforming, ResiduesPartitionTheSystemResidual) {
    for (auto mode : {CancellationMode::Aggregate, CancellationMode::PerSymbol}) {
        const auto f = make(mode, mode == CancellationMode::Aggregate ? 2 : 3, 5, 80);
        const auto sys = build_effective_matrix(f.ch, f.gains, mode);
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto pb = make_passive(random_phi(f.cfg.N, s) * 1e-3);
            const double direct = (sys.h_tilde * pb.phi - sys.b_target).squaredNorm();
            EXPECT_NEAR(residue_total(f, pb), direct, 1e-10 * direct);
        }
    }
}

TEST(Beamforming, IdealSolveCancelsInterference) {
    for (auto mode : {CancellationMode::Aggregate, CancellationMode::PerSymbol}) {
        for (std::uint64_t t = 0; t < 50; ++t) {
            const auto f = make(mode, 2, t);
            const auto sys = build_effective_matrix(f.ch, f.gains, mode);
            const auto pb = solve_passive(sys, f.cfg.N);
            EXPECT_TRUE(pb.exact);
            EXPECT_LE(std::sqrt(residue_total(f, pb)), 1e-10 * sys.b_target.norm());
            // Without the RIS the interference is untouched.
            const auto off = make_passive(CVector::Zero(f.cfg.N));
            EXPECT_NEAR(residue_total(f, off), sys.b_target.squaredNorm(), 1e-12 * sys.b_target.squaredNorm());
        }
    }
}

TEST(Beamforming, UnderSizedSurfaceIsInexact) {
    const auto f = make(CancellationMode::Aggregate, 2, 1, 4);
    const auto sys = build_effective_matrix(f.ch, f.gains, f.cfg.cancellation_mode);
    const auto pb = solve_passive(sys, 4);
    EXPECT_FALSE(pb.exact);
    EXPECT_GT(pb.residual_norm, 0.0);
}

TEST(Beamforming, PolarDecomposition) {
    CVector phi(3);
    phi << cplx(0.0, 0.5), cplx(-2.0, 0.0), cplx(0.3, -0.4);
    const auto pb = make_passive(phi);
    EXPECT_NEAR(pb.amplitude[0], 0.5, 1e-15);
    EXPECT_NEAR(pb.phase[0], std::numbers::pi / 2, 1e-15);
    EXPECT_NEAR(pb.phase[1], std::numbers::pi, 1e-15);
    EXPECT_NEAR(pb.phase[2], 2 * std::numbers::pi - std::atan2(0.4, 0.3), 1e-15);
    EXPECT_FALSE(pb.feasible);
    for (double p : pb.phase) {
        EXPECT_GE(p, 0.0);
        EXPECT_LT(p, 2 * std::numbers::pi);
    }
}

TEST(Quantize, LevelsAndTies) {
    CVector phi(4);
    // amplitude 0.3 at 1 bit: levels {0, 0.5}, nearest 0.5. 0.25 ties to 0.
    phi << std::polar(0.3, 0.1), std::polar(0.25, 0.0), std::polar(0.9, std::numbers::pi / 2 - 0.01),
        std::polar(0.6, 2 * std::numbers::pi - 0.1);
    const auto q = quantize(make_passive(phi), 1);
    EXPECT_DOUBLE_EQ(q.amplitude[0], 0.5);
    EXPECT_DOUBLE_EQ(q.phase[0], 0.0);
    EXPECT_DOUBLE_EQ(q.amplitude[1], 0.0);
    EXPECT_DOUBLE_EQ(q.amplitude[2], 0.5);  // top level is (T-1)/T
    EXPECT_DOUBLE_EQ(q.phase[2], 0.0);
    EXPECT_DOUBLE_EQ(q.phase[3], 0.0);      // wraps around
    EXPECT_TRUE(q.quantized);
    EXPECT_FALSE(q.exact);
    EXPECT_THROW(quantize(make_passive(phi), 0), DomainError);
}

TEST(Quantize, IdempotentAndBounded) {
    const auto f = make(CancellationMode::Aggregate, 2, 3);
    const auto sys = build_effective_matrix(f.ch, f.gains, f.cfg.cancellation_mode);
    const auto pb = solve_passive(sys, f.cfg.N);
    for (int bits = 1; bits <= 8; ++bits) {
        const auto q = quantize(pb, bits);
        const auto qq = quantize(q, bits);
        const double levels = std::ldexp(1.0, bits);
        for (std::size_t i = 0; i < pb.amplitude.size(); ++i) {
            EXPECT_EQ(q.amplitude[i], qq.amplitude[i]);
            EXPECT_EQ(q.phase[i], qq.phase[i]);
            if (pb.amplitude[i] <= (levels - 1) / levels)
                EXPECT_LE(std::abs(q.amplitude[i] - pb.amplitude[i]), 0.5 / levels + 1e-15);
            double dphi = std::abs(q.phase[i] - pb.phase[i]);
            dphi = std::min(dphi, 2 * std::numbers::pi - dphi);
            EXPECT_LE(dphi, std::numbers::pi / levels + 1e-12);
        }
    }
}

TEST(Quantize, ResidueShrinksWithResolution) {
    const int trials = 300;
    std::vector<double> mean(4, 0.0);
    for (int t = 0; t < trials; ++t) {
        const auto f = make(CancellationMode::Aggregate, 2, static_cast<std::uint64_t>(t));
        const auto pb = solve_passive(build_effective_matrix(f.ch, f.gains, f.cfg.cancellation_mode), f.cfg.N);
        for (int b = 3; b <= 6; ++b) mean[static_cast<std::size_t>(b - 3)] += residue_total(f, quantize(pb, b)) / trials;
    }
    for (std::size_t i = 1; i < mean.size(); ++i) EXPECT_LT(mean[i], mean[i - 1]);
}
