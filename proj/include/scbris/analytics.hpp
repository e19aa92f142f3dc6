#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "scbris/errors.hpp"
#include "scbris/numerics.hpp"
#include "scbris/pathloss.hpp"
#include "scbris/scenario.hpp"

namespace scbris {

/// Parameters of the closed-form evaluators for one user.
struct ClosedFormInputs {
    int L = 1;
    int K = 1;
    std::vector<double> power_alloc;   // alpha_v^2
    std::vector<double> target_rates;  // R_v
    double p_watt = 1.0;
    double noise_watt = 1.0;
    double l_direct = 1.0;             // L_b of the user being evaluated
};

inline ClosedFormInputs closed_form_inputs(const ScenarioConfig& cfg, int m, int k) {
    ClosedFormInputs in;
    in.L = cfg.L;
    in.K = cfg.K;
    in.power_alloc = cfg.power_alloc;
    in.target_rates = cfg.target_rate;
    in.p_watt = cfg.tx_power_watt();
    in.noise_watt = cfg.noise_watt();
    in.l_direct = largescale_direct(cfg.d_direct[m][k], cfg.alpha3);
    return in;
}

inline double rate_threshold(double rate) {
    return std::exp2(rate) - 1.0;
}

/// Outage thresholds on the effective gain for SIC stages v = 0..k:
/// I_v = L eps_v sigma^2 / (p L_b (alpha_v^2 - eps_v sum_{q>v} alpha_q^2)).
/// Throws InfeasibleRates (1-based stage) when a denominator is not positive.
inline std::vector<double> outage_thresholds(const ClosedFormInputs& in, int k) {
    std::vector<double> out;
    for (int v = 0; v <= k; ++v) {
        const double eps = rate_threshold(in.target_rates[static_cast<std::size_t>(v)]);
        double tail = 0.0;
        for (std::size_t q = static_cast<std::size_t>(v) + 1; q < in.power_alloc.size(); ++q)
            tail += in.power_alloc[q];
        const double margin = in.power_alloc[static_cast<std::size_t>(v)] - eps * tail;
        if (!(margin > 0.0)) throw InfeasibleRates(v + 1);
        out.push_back(in.L * eps * in.noise_watt / (in.p_watt * in.l_direct * margin));
    }
    return out;
}

/// Outage probability of user k (zero-based) with an ideal RIS:
/// P(L, max_v I_v), the regularized lower incomplete gamma.
inline double op_closed_form(const ClosedFormInputs& in, int k) {
    const auto thr = outage_thresholds(in, k);
    return gamma_p(in.L, *std::max_element(thr.begin(), thr.end()));
}

/// OP of user k in the equal-time-slot OMA baseline:
/// P(L, L eps_O sigma^2 / (p L_b)), eps_O = 2^{K R_k} - 1.
inline double op_oma(const ClosedFormInputs& in, int k) {
    const double eps = rate_threshold(in.K * in.target_rates[static_cast<std::size_t>(k)]);
    return gamma_p(in.L, in.L * eps * in.noise_watt / (in.p_watt * in.l_direct));
}

/// A curve sampled at transmit powers (watts, any consistent linear unit).
using Curve = std::vector<std::pair<double, double>>;

namespace detail {

inline Curve sorted_by_power(Curve c) {
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return c;
}

}  // namespace detail

/// -d log10 P / d log10 p between the two highest-power points with
/// 0 < P < 1e-2.
inline double diversity_order(const Curve& op_curve) {
    Curve usable;
    for (const auto& pt : detail::sorted_by_power(op_curve))
        if (pt.second > 0.0 && pt.second < 1e-2 && pt.first > 0.0) usable.push_back(pt);
    if (usable.size() < 2) throw DomainError("diversity_order: insufficient high-SNR points");
    const auto& [p1, v1] = usable[usable.size() - 2];
    const auto& [p2, v2] = usable.back();
    return -(std::log10(v2) - std::log10(v1)) / (std::log10(p2) - std::log10(p1));
}

/// Least-squares slope of -log10 P against log10 p over all points with P > 0.
inline double loglog_slope_fit(const Curve& op_curve) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [p, v] : op_curve) {
        if (!(v > 0.0) || !(p > 0.0)) continue;
        const double x = std::log10(p), y = std::log10(v);
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    if (n < 2) throw DomainError("loglog_slope_fit: insufficient points");
    const double denom = n * sxx - sx * sx;
    if (!(denom > 0.0)) throw DomainError("loglog_slope_fit: degenerate abscissae");
    return -(n * sxy - sx * sy) / denom;
}

/// dR / d log2 p between the two highest-power points.
inline double high_snr_slope(const Curve& er_curve) {
    if (er_curve.size() < 2) throw DomainError("high_snr_slope: insufficient points");
    const auto c = detail::sorted_by_power(er_curve);
    const auto& [p1, r1] = c[c.size() - 2];
    const auto& [p2, r2] = c.back();
    if (!(p2 > p1) || !(p1 > 0.0)) throw DomainError("high_snr_slope: need two distinct positive powers");
    return (r2 - r1) / (std::log2(p2) - std::log2(p1));
}

/// J_i(C) = integral_0^inf x^i e^{-Cx} / (1 + x) dx.
///
/// From J_i + J_{i-1} = (i-1)!/C^i and J_0 = -e^C Ei(-C):
/// J_i = (-1)^{i+1} [ e^C Ei(-C) + sum_{a=1}^{i} (-1)^{a-1} (a-1)! C^{-a} ].
inline double rate_integral(int i, double C) {
    if (!(C > 0.0)) throw DomainError("rate_integral: C must be positive");
    if (i < 0) throw DomainError("rate_integral: i must be >= 0");
    double bracket = -exp_scaled_e1(C);  // e^C Ei(-C)
    double fact = 1.0;  // (a-1)!
    for (int a = 1; a <= i; ++a) {
        if (a > 1) fact *= (a - 1);
        bracket += ((a - 1) % 2 == 0 ? 1.0 : -1.0) * fact * std::pow(C, -a);
    }
    return (i % 2 == 1 ? 1.0 : -1.0) * bracket;
}

/// Ergodic rate for SINR = C^{-1} X, X ~ Gamma(L, 1):
/// (1/ln 2) sum_{i<L} C^i / i! * J_i(C).
inline double ergodic_rate_gamma(double C, int L) {
    if (!(C > 0.0)) throw DomainError("ergodic_rate_gamma: C must be positive");
    if (L < 1) throw DomainError("ergodic_rate_gamma: L must be >= 1");
    double sum = 0.0;
    double coeff = 1.0;  // C^i / i!
    for (int i = 0; i < L; ++i) {
        if (i > 0) coeff *= C / i;
        sum += coeff * rate_integral(i, C);
    }
    return sum / std::numbers::ln2;
}

/// C = L sigma^2 / (p L_b alpha_K^2) for the strongest user.
inline double er_scale(const ClosedFormInputs& in) {
    return in.L * in.noise_watt / (in.p_watt * in.l_direct * in.power_alloc.back());
}

/// Closed-form ergodic rate of user K (ideal RIS).
inline double er_user_K(const ClosedFormInputs& in) {
    return ergodic_rate_gamma(er_scale(in), in.L);
}

/// High-SNR ergodic-rate ceiling of user k < K: log2(1 + alpha_k^2 / sum_{q>k} alpha_q^2).
inline double er_ceiling_user_k(std::span<const double> power_alloc, int k, double cap_bits = 64.0) {
    if (k < 0 || k + 1 >= static_cast<int>(power_alloc.size())) {
        throw DomainError("er_ceiling_user_k: the strongest user has no ceiling");
    }
    double tail = 0.0;
    for (std::size_t q = static_cast<std::size_t>(k) + 1; q < power_alloc.size(); ++q) tail += power_alloc[q];
    if (!(tail > 0.0)) throw DomainError("er_ceiling_user_k: degenerate allocation");
    const double r = std::log2(1.0 + power_alloc[static_cast<std::size_t>(k)] / tail);
    if (!(r <= cap_bits)) throw DomainError("er_ceiling_user_k: ceiling exceeds cap");
    return r;
}

/// Cluster sum rate.
inline double spectral_efficiency(std::span<const double> rates) {
    if (rates.empty()) throw DomainError("spectral_efficiency: no user rates");
    double s = 0.0;
    for (double r : rates) s += r;
    return s;
}

/// Total dissipated power P_B + K P_U + p * amp_factor + N P_RIS.
inline double total_power(const PowerModel& pm, double p_watt, int K, int N) {
    return pm.p_bs_watt + K * pm.p_user_watt + p_watt * pm.amp_factor + N * pm.p_ris_watt;
}

inline double energy_efficiency(double se, const PowerModel& pm, double p_watt, int K, int N) {
    if (pm.amp_factor < 1.0 || pm.p_bs_watt < 0 || pm.p_user_watt < 0 || pm.p_ris_watt < 0 || p_watt < 0) {
        throw DomainError("energy_efficiency: powers must be >= 0 and amp_factor >= 1");
    }
    const double denom = total_power(pm, p_watt, K, N);
    if (!(denom > 0.0)) throw DomainError("energy_efficiency: zero total power");
    return se / denom;
}

}  // namespace scbris
