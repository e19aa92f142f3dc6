#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "scbris/channel.hpp"
#include "scbris/numerics.hpp"
#include "scbris/pathloss.hpp"

namespace scbris {

/// Stacked cancellation system h_tilde * phi = b_target.
struct EffectiveSystem {
    struct Row {
        int m, k, l;
        int interferer;  // m' for per-symbol rows, -1 for aggregate rows
    };

    CMatrix h_tilde;
    CVector b_target;
    std::vector<Row> rows;
    CancellationMode mode = CancellationMode::Aggregate;
};

/// RIS coefficients phi_n = amplitude_n * exp(j * phase_n).
struct PassiveBeamforming {
    CVector phi;
    std::vector<double> amplitude;
    std::vector<double> phase;  // [0, 2*pi)
    bool feasible = true;       // max amplitude <= 1 + 1e-12
    bool quantized = false;
    bool exact = true;          // residual <= 1e-10 * |B|
    double residual_norm = 0.0;
};

namespace detail {

inline double wrap_phase(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t < 0.0) t += two_pi;
    if (t >= two_pi) t -= two_pi;
    return t;
}

inline void check_shapes(const ChannelRealization& ch, const LargeScaleGains& gains) {
    if (gains.M != ch.M || gains.K != ch.K || ch.H.rows() != ch.N || ch.H.cols() != ch.M ||
        ch.W.size() != static_cast<std::size_t>(ch.M * ch.K) || ch.G.size() != ch.W.size()) {
        throw NumericError("beamforming: channel/gain shape mismatch");
    }
}

}  // namespace detail

/// Build a PassiveBeamforming from a raw coefficient vector.
inline PassiveBeamforming make_passive(CVector phi) {
    PassiveBeamforming pb;
    const auto n = static_cast<std::size_t>(phi.size());
    pb.amplitude.resize(n);
    pb.phase.resize(n);
    double max_amp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx v = phi(static_cast<Eigen::Index>(i));
        pb.amplitude[i] = std::abs(v);
        pb.phase[i] = detail::wrap_phase(std::arg(v));
        max_amp = std::max(max_amp, pb.amplitude[i]);
    }
    pb.feasible = max_amp <= 1.0 + 1e-12;
    pb.phi = std::move(phi);
    return pb;
}

/// Interference each user must see cancelled, scaled by sqrt(l_direct).
///
/// Aggregate: one entry per (m, k, l), -sum_{m' != m} w_{l,m'}.
/// Per-symbol: one entry per (m, k, l, m' != m), -w_{l,m'}.
/// Empty for M = 1.
inline CVector build_interference_target(const ChannelRealization& ch, const LargeScaleGains& gains,
                                         CancellationMode mode) {
    detail::check_shapes(ch, gains);
    if (ch.M == 1) return CVector(0);
    const int rows = cancellation_rows(ch.M, ch.K, ch.L, mode);
    CVector b(rows);
    Eigen::Index r = 0;
    for (int m = 0; m < ch.M; ++m) {
        for (int k = 0; k < ch.K; ++k) {
            const CMatrix& w = ch.direct(m, k);
            const double s = std::sqrt(gains.direct(m, k));
            for (int l = 0; l < ch.L; ++l) {
                if (mode == CancellationMode::Aggregate) {
                    b(r++) = -(w.row(l).sum() - w(l, m)) * s;
                } else {
                    for (int mi = 0; mi < ch.M; ++mi)
                        if (mi != m) b(r++) = -w(l, mi) * s;
                }
            }
        }
    }
    return b;
}

/// Stacked effective matrix and target.
///
/// Aggregate row (m,k,l), column n: sqrt(l_reflect) * g_{l,n} * sum_{m'} h_{n,m'},
/// so that the row block times phi is G diag(phi) H 1_M sqrt(l_reflect).
/// Per-symbol row (m,k,l,m'): sqrt(l_reflect) * g_{l,n} * h_{n,m'}.
inline EffectiveSystem build_effective_matrix(const ChannelRealization& ch, const LargeScaleGains& gains,
                                              CancellationMode mode) {
    detail::check_shapes(ch, gains);
    EffectiveSystem sys;
    sys.mode = mode;
    sys.b_target = build_interference_target(ch, gains, mode);
    if (ch.M == 1) {
        sys.h_tilde = CMatrix(0, ch.N);
        return sys;
    }
    const int rows = cancellation_rows(ch.M, ch.K, ch.L, mode);
    sys.h_tilde.resize(rows, ch.N);
    sys.rows.reserve(static_cast<std::size_t>(rows));
    const CVector h_sum = ch.H.rowwise().sum();
    Eigen::Index r = 0;
    for (int m = 0; m < ch.M; ++m) {
        for (int k = 0; k < ch.K; ++k) {
            const CMatrix& g = ch.reflect(m, k);
            const double s = std::sqrt(gains.reflect(m, k));
            for (int l = 0; l < ch.L; ++l) {
                if (mode == CancellationMode::Aggregate) {
                    sys.h_tilde.row(r++) = s * g.row(l).cwiseProduct(h_sum.transpose());
                    sys.rows.push_back({m, k, l, -1});
                } else {
                    for (int mi = 0; mi < ch.M; ++mi) {
                        if (mi == m) continue;
                        sys.h_tilde.row(r++) = s * g.row(l).cwiseProduct(ch.H.col(mi).transpose());
                        sys.rows.push_back({m, k, l, mi});
                    }
                }
            }
        }
    }
    return sys;
}

/// Minimum-norm RIS vector for the cancellation system. Amplitudes above one
/// are flagged, never clipped.
inline PassiveBeamforming solve_passive(const EffectiveSystem& sys, int n, double rank_tol = 1e-10) {
    if (sys.h_tilde.cols() != n) throw NumericError("solve_passive: column count differs from N");
    if (sys.h_tilde.rows() == 0) {
        auto pb = make_passive(CVector::Zero(n));
        pb.exact = true;
        return pb;
    }
    const auto sol = min_norm_solve({sys.h_tilde, sys.b_target}, rank_tol);
    auto pb = make_passive(sol.x);
    pb.residual_norm = sol.residual_norm;
    pb.exact = sol.residual_norm <= 1e-10 * sys.b_target.norm();
    return pb;
}

/// Nearest-level quantization with T = 2^bits levels each for amplitude
/// {0, 1/T, ..., (T-1)/T} and phase {0, 2pi/T, ..., (T-1) 2pi/T} (circular).
/// Ties go to the smaller level.
inline PassiveBeamforming quantize(const PassiveBeamforming& pb, int bits) {
    if (bits < 1 || bits > 30) throw DomainError("quantize: bits must be in [1, 30]");
    const int levels = 1 << bits;
    const double d_amp = 1.0 / levels;
    const double d_phase = 2.0 * std::numbers::pi / levels;
    const auto n = pb.amplitude.size();
    PassiveBeamforming out;
    out.amplitude.resize(n);
    out.phase.resize(n);
    out.phi.resize(static_cast<Eigen::Index>(n));
    double max_amp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        int ia = static_cast<int>(std::ceil(pb.amplitude[i] / d_amp - 0.5));
        ia = std::clamp(ia, 0, levels - 1);
        long ip = static_cast<long>(std::ceil(pb.phase[i] / d_phase - 0.5));
        ip = ((ip % levels) + levels) % levels;
        out.amplitude[i] = ia * d_amp;
        out.phase[i] = static_cast<double>(ip) * d_phase;
        out.phi(static_cast<Eigen::Index>(i)) = std::polar(out.amplitude[i], out.phase[i]);
        max_amp = std::max(max_amp, out.amplitude[i]);
    }
    out.feasible = max_amp <= 1.0 + 1e-12;
    out.quantized = true;
    out.exact = false;
    out.residual_norm = pb.residual_norm;
    return out;
}

/// Reflected channel G diag(phi) H sqrt(l_reflect), L x M, for user (m, k).
inline CMatrix reflected_channel(const ChannelRealization& ch, const LargeScaleGains& gains,
                                 const CVector& phi, int m, int k) {
    const CMatrix scaled_h = phi.asDiagonal() * ch.H;
    return std::sqrt(gains.reflect(m, k)) * (ch.reflect(m, k) * scaled_h);
}

/// Interference left over at user (m, k) after reflection.
///
/// Aggregate: |G diag(phi) H sqrt(Lr) 1_M + W_bar sqrt(Lb) 1_{M-1}|^2, the
/// user's block of |h_tilde phi - B|^2. Per-symbol: sum over m' != m of
/// |[G diag(phi) H]_{:,m'} sqrt(Lr) + w_{:,m'} sqrt(Lb)|^2.
inline double residue(const ChannelRealization& ch, const LargeScaleGains& gains,
                      const PassiveBeamforming& pb, int m, int k,
                      CancellationMode mode = CancellationMode::Aggregate) {
    if (ch.M == 1) return 0.0;
    const CMatrix refl = reflected_channel(ch, gains, pb.phi, m, k);
    const CMatrix& w = ch.direct(m, k);
    const double sb = std::sqrt(gains.direct(m, k));
    if (mode == CancellationMode::Aggregate) {
        const CVector v = refl.rowwise().sum() + sb * (w.rowwise().sum() - w.col(m));
        return v.squaredNorm();
    }
    double total = 0.0;
    for (int mi = 0; mi < ch.M; ++mi) {
        if (mi == m) continue;
        total += (refl.col(mi) + sb * w.col(mi)).squaredNorm();
    }
    return total;
}

}  // namespace scbris
