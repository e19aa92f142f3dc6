#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "scbris/beamforming.hpp"
#include "scbris/channel.hpp"
#include "scbris/pathloss.hpp"
#include "scbris/scenario.hpp"

namespace scbris {

/// Sum over receive antennas of |w_{l,m}|^2 for the desired column m.
inline double effective_gain(const ChannelRealization& ch, int m, int k) {
    return ch.direct(m, k).col(m).squaredNorm();
}

/// |sum_l w_{l,m}|^2: what the all-ones detector literally collects.
/// Diagnostic only; the closed forms are built on effective_gain.
inline double literal_detector_gain(const ChannelRealization& ch, int m, int k) {
    return std::norm(ch.direct(m, k).col(m).sum());
}

namespace detail {

inline double tail_share(std::span<const double> power_alloc, int k) {
    double s = 0.0;
    for (std::size_t q = static_cast<std::size_t>(k) + 1; q < power_alloc.size(); ++q) s += power_alloc[q];
    return s;
}

}  // namespace detail

/// SINR of the k-th NOMA signal with the weaker signals already removed and
/// the stronger users' signals treated as noise (ideal RIS, no residue).
inline double sinr_ideal(double eff_gain, double l_direct, double p_watt,
                         std::span<const double> power_alloc, int k, double noise_watt, int L) {
    const double sig = eff_gain * l_direct * p_watt;
    return sig * power_alloc[static_cast<std::size_t>(k)] /
           (sig * detail::tail_share(power_alloc, k) + L * noise_watt);
}

/// As sinr_ideal with the interference residue added to the denominator.
inline double sinr_nonideal(double eff_gain, double residue, double l_direct, double p_watt,
                            std::span<const double> power_alloc, int k, double noise_watt, int L) {
    const double sig = eff_gain * l_direct * p_watt;
    return sig * power_alloc[static_cast<std::size_t>(k)] /
           (residue * p_watt + sig * detail::tail_share(power_alloc, k) + L * noise_watt);
}

struct SicOutcome {
    bool outage = false;
    double rate = 0.0;  // log2(1 + SINR_{k->k}) if decoded, else 0
};

/// SIC at user k: decode signals 0..k in order; outage if any stage has
/// log2(1 + SINR_{k->v}) <= R_v.
inline SicOutcome sic_chain(double eff_gain, double residue, double l_direct, double p_watt,
                            std::span<const double> power_alloc, std::span<const double> target_rates,
                            int k, double noise_watt, int L) {
    SicOutcome out;
    double own = 0.0;
    for (int v = 0; v <= k; ++v) {
        const double s = sinr_nonideal(eff_gain, residue, l_direct, p_watt, power_alloc, v, noise_watt, L);
        if (std::log2(1.0 + s) <= target_rates[static_cast<std::size_t>(v)]) out.outage = true;
        if (v == k) own = s;
    }
    out.rate = out.outage ? 0.0 : std::log2(1.0 + own);
    return out;
}

struct OmaOutcome {
    double snr = 0.0;
    bool outage = false;
};

/// TDMA baseline: each of the K users gets 1/K of the time at full power.
/// A nonzero residue (quantized RIS) enters the denominator like sinr_nonideal.
inline OmaOutcome oma_snr(double eff_gain, double l_direct, double p_watt, double noise_watt, int L, int K,
                          double target_rate, double residue = 0.0) {
    OmaOutcome out;
    out.snr = p_watt * l_direct * eff_gain / (residue * p_watt + L * noise_watt);
    out.outage = std::log2(1.0 + out.snr) / K <= target_rate;
    return out;
}

/// Per-user quantities that do not depend on the transmit power.
struct UserChannelState {
    double eff_gain = 0.0;
    double literal_gain = 0.0;
    double residue = 0.0;
    double l_direct = 0.0;
    /// All-ones-detector coefficient of each transmit antenna's symbol,
    /// 1^T (G diag(phi) H sqrt(Lr) + W sqrt(Lb)).
    std::vector<cplx> combined;
};

inline UserChannelState user_channel_state(const ChannelRealization& ch, const LargeScaleGains& gains,
                                           const PassiveBeamforming& pb, int m, int k,
                                           CancellationMode mode) {
    UserChannelState s;
    s.eff_gain = effective_gain(ch, m, k);
    s.literal_gain = literal_detector_gain(ch, m, k);
    s.l_direct = gains.direct(m, k);
    s.residue = residue(ch, gains, pb, m, k, mode);
    const CMatrix total = reflected_channel(ch, gains, pb.phi, m, k) + std::sqrt(s.l_direct) * ch.direct(m, k);
    const Eigen::RowVectorXcd coeff = total.colwise().sum();
    s.combined.assign(coeff.data(), coeff.data() + coeff.size());
    return s;
}

/// Diagnostic SINR from the true per-symbol coefficients seen through the
/// all-ones detector; includes the reflected desired component and every
/// cross-cluster leak.
inline double exact_per_symbol_sinr(const UserChannelState& s, int m, int k, double p_watt,
                                    std::span<const double> power_alloc, double noise_watt, int L) {
    const double desired = std::norm(s.combined[static_cast<std::size_t>(m)]);
    double total_alloc = 0.0;
    for (double a : power_alloc) total_alloc += a;
    double inter = 0.0;
    for (std::size_t mi = 0; mi < s.combined.size(); ++mi)
        if (static_cast<int>(mi) != m) inter += std::norm(s.combined[mi]);
    return desired * p_watt * power_alloc[static_cast<std::size_t>(k)] /
           (desired * p_watt * detail::tail_share(power_alloc, k) + inter * p_watt * total_alloc +
            L * noise_watt);
}

inline double exact_per_symbol_sinr(const ChannelRealization& ch, const LargeScaleGains& gains,
                                    const PassiveBeamforming& pb, int m, int k, double p_watt,
                                    std::span<const double> power_alloc, double noise_watt,
                                    CancellationMode mode = CancellationMode::Aggregate) {
    return exact_per_symbol_sinr(user_channel_state(ch, gains, pb, m, k, mode), m, k, p_watt, power_alloc,
                                 noise_watt, ch.L);
}

/// Everything the estimators need from one trial at one transmit power.
struct LinkMetrics {
    int M = 0, K = 0;
    std::vector<double> eff_gain;  // [m*K + k]
    std::vector<double> residue;
    std::vector<double> sinr;      // [(m*K + k)*K + v], v <= k filled
    std::vector<double> rate;      // log2(1 + SINR_{k->k}), unconditional
    std::vector<char> outage;
    std::vector<double> oma_snr;
    std::vector<char> oma_outage;
    std::vector<double> exact_sinr;
    bool feasible = true;  // RIS amplitudes all <= 1
    bool exact = true;     // cancellation system solved to residual tolerance

    std::size_t idx(int m, int k) const { return static_cast<std::size_t>(m * K + k); }
    double sinr_kv(int m, int k, int v) const { return sinr[idx(m, k) * static_cast<std::size_t>(K) + v]; }
};

/// Evaluate every user at transmit power p_watt from per-user channel states.
inline LinkMetrics evaluate_link_metrics(const ScenarioConfig& cfg, std::span<const UserChannelState> users,
                                         const PassiveBeamforming& pb, double p_watt) {
    LinkMetrics lm;
    lm.M = cfg.M;
    lm.K = cfg.K;
    const auto n_users = static_cast<std::size_t>(cfg.M * cfg.K);
    lm.eff_gain.resize(n_users);
    lm.residue.resize(n_users);
    lm.sinr.assign(n_users * static_cast<std::size_t>(cfg.K), 0.0);
    lm.rate.resize(n_users);
    lm.outage.resize(n_users);
    lm.oma_snr.resize(n_users);
    lm.oma_outage.resize(n_users);
    lm.exact_sinr.resize(n_users);
    lm.feasible = pb.feasible;
    lm.exact = pb.exact;
    const double noise = cfg.noise_watt();
    const std::span<const double> alloc(cfg.power_alloc);
    const std::span<const double> rates(cfg.target_rate);
    for (int m = 0; m < cfg.M; ++m) {
        for (int k = 0; k < cfg.K; ++k) {
            const auto i = lm.idx(m, k);
            const auto& u = users[i];
            lm.eff_gain[i] = u.eff_gain;
            lm.residue[i] = u.residue;
            bool out = false;
            for (int v = 0; v <= k; ++v) {
                const double s = sinr_nonideal(u.eff_gain, u.residue, u.l_direct, p_watt, alloc, v, noise, cfg.L);
                lm.sinr[i * static_cast<std::size_t>(cfg.K) + static_cast<std::size_t>(v)] = s;
                if (std::log2(1.0 + s) <= rates[static_cast<std::size_t>(v)]) out = true;
            }
            lm.outage[i] = out;
            lm.rate[i] = std::log2(1.0 + lm.sinr_kv(m, k, k));
            const auto oma = oma_snr(u.eff_gain, u.l_direct, p_watt, noise, cfg.L, cfg.K,
                                     rates[static_cast<std::size_t>(k)], u.residue);
            lm.oma_snr[i] = oma.snr;
            lm.oma_outage[i] = oma.outage;
            lm.exact_sinr[i] = exact_per_symbol_sinr(u, m, k, p_watt, alloc, noise, cfg.L);
        }
    }
    return lm;
}

}  // namespace scbris
