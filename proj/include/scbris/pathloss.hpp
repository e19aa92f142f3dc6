#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "scbris/scenario.hpp"

namespace scbris {

/// BS-user large-scale gain d^-alpha3.
inline double largescale_direct(double d, double alpha3) {
    if (!(d > 0.0)) throw DomainError("largescale_direct: distance must be positive");
    return std::pow(d, -alpha3);
}

/// Diffuse scattering (product-distance law) d1^-alpha1 * d2^-alpha2.
inline double largescale_diffuse(double d1, double d2, double alpha1, double alpha2) {
    if (!(d1 > 0.0 && d2 > 0.0)) throw DomainError("largescale_diffuse: distances must be positive");
    return std::pow(d1, -alpha1) * std::pow(d2, -alpha2);
}

/// Anomalous reflector (sum-distance law) (d1 + d2^(alpha2/alpha1))^-alpha1.
inline double largescale_anomalous(double d1, double d2, double alpha1, double alpha2) {
    if (!(d1 > 0.0 && d2 > 0.0)) throw DomainError("largescale_anomalous: distances must be positive");
    const double d2_eff = alpha1 == alpha2 ? d2 : std::pow(d2, alpha2 / alpha1);
    return std::pow(d1 + d2_eff, -alpha1);
}

namespace detail {

inline int ceil_count(double bound) {
    const double c = std::ceil(bound);
    return c < 1.0 ? 1 : static_cast<int>(c);
}

}  // namespace detail

/// Smallest N whose coherent reflected amplitude matches the M-1 interfering
/// direct amplitudes under the diffuse law (all-ones fading).
inline int min_ris_diffuse(int M, double d1, double d2, double d_b, double alpha1, double alpha2,
                           double alpha3) {
    const double ratio = largescale_direct(d_b, alpha3) / largescale_diffuse(d1, d2, alpha1, alpha2);
    return detail::ceil_count((M - 1) * std::sqrt(ratio));
}

/// As min_ris_diffuse, with the anomalous-reflector sum-distance law.
inline int min_ris_anomalous(int M, double d1, double d2, double d_b, double alpha1, double alpha2,
                             double alpha3) {
    const double ratio =
        largescale_direct(d_b, alpha3) / largescale_anomalous(d1, d2, alpha1, alpha2);
    return detail::ceil_count((M - 1) * std::sqrt(ratio));
}

/// Linear-system rank requirement: rows of the stacked effective matrix.
inline int cancellation_rows(int M, int K, int L, CancellationMode mode) {
    return mode == CancellationMode::Aggregate ? M * K * L : M * K * L * (M - 1);
}

struct FeasibilityBreakdown {
    int amplitude_bound = 1;  // worst user, scenario-specific
    int worst_m = 0, worst_k = 0;
    int rank_bound = 1;       // MKL or MKL(M-1)
    int overall = 1;
    std::string binding;      // "amplitude" or "MKL"/"MKL(M-1)"
};

inline FeasibilityBreakdown feasibility_breakdown(const ScenarioConfig& cfg) {
    FeasibilityBreakdown out;
    out.amplitude_bound = 0;
    for (int m = 0; m < cfg.M; ++m) {
        for (int k = 0; k < cfg.K; ++k) {
            const double d2 = cfg.d_user[m][k];
            const double db = cfg.d_direct[m][k];
            const int n = cfg.ris_scenario == RisScenario::Diffuse
                              ? min_ris_diffuse(cfg.M, cfg.d1, d2, db, cfg.alpha1, cfg.alpha2, cfg.alpha3)
                              : min_ris_anomalous(cfg.M, cfg.d1, d2, db, cfg.alpha1, cfg.alpha2,
                                                  cfg.alpha3);
            if (n > out.amplitude_bound) {
                out.amplitude_bound = n;
                out.worst_m = m;
                out.worst_k = k;
            }
        }
    }
    out.rank_bound = cancellation_rows(cfg.M, cfg.K, cfg.L, cfg.cancellation_mode);
    if (out.rank_bound >= out.amplitude_bound) {
        out.overall = std::max(out.rank_bound, 1);
        out.binding = cfg.cancellation_mode == CancellationMode::Aggregate ? "MKL" : "MKL(M-1)";
    } else {
        out.overall = out.amplitude_bound;
        out.binding = "amplitude";
    }
    return out;
}

/// Minimum RIS size over all users: max of the amplitude bound and the
/// row count of the cancellation system.
inline int min_ris_overall(const ScenarioConfig& cfg) {
    return feasibility_breakdown(cfg).overall;
}

struct Table2Row {
    RisScenario scenario;
    double alpha1, alpha2, alpha3;
    int min_n;
};

/// Feasibility table at d1 = d_user = 80 m, d_b = 100 m, M = 2.
inline std::vector<Table2Row> table2() {
    constexpr int M = 2;
    constexpr double d1 = 80.0, d2 = 80.0, db = 100.0;
    constexpr std::array<std::array<double, 3>, 3> exps = {
        {{3.5, 3.5, 3.5}, {2.2, 3.5, 3.5}, {2.2, 2.2, 3.5}}};
    std::vector<Table2Row> rows;
    for (auto scen : {RisScenario::Diffuse, RisScenario::Anomalous}) {
        for (const auto& a : exps) {
            const int n = scen == RisScenario::Diffuse
                              ? min_ris_diffuse(M, d1, d2, db, a[0], a[1], a[2])
                              : min_ris_anomalous(M, d1, d2, db, a[0], a[1], a[2]);
            rows.push_back({scen, a[0], a[1], a[2], n});
        }
    }
    return rows;
}

/// Large-scale gains for every user; l_reflect follows the config's scenario.
struct LargeScaleGains {
    int M = 0, K = 0;
    std::vector<double> l_direct;   // [m*K + k]
    std::vector<double> l_reflect;  // [m*K + k]

    double direct(int m, int k) const { return l_direct[static_cast<std::size_t>(m * K + k)]; }
    double reflect(int m, int k) const { return l_reflect[static_cast<std::size_t>(m * K + k)]; }
};

inline LargeScaleGains compute_gains(const ScenarioConfig& cfg) {
    LargeScaleGains g;
    g.M = cfg.M;
    g.K = cfg.K;
    for (int m = 0; m < cfg.M; ++m) {
        for (int k = 0; k < cfg.K; ++k) {
            g.l_direct.push_back(largescale_direct(cfg.d_direct[m][k], cfg.alpha3));
            g.l_reflect.push_back(cfg.ris_scenario == RisScenario::Diffuse
                                      ? largescale_diffuse(cfg.d1, cfg.d_user[m][k], cfg.alpha1, cfg.alpha2)
                                      : largescale_anomalous(cfg.d1, cfg.d_user[m][k], cfg.alpha1,
                                                             cfg.alpha2));
        }
    }
    return g;
}

/// Fill N from n_auto_factor (if set) and check N >= 1.
inline ScenarioConfig resolve_config(ScenarioConfig cfg) {
    validate_scenario(cfg);
    if (cfg.n_auto_factor) {
        cfg.N = static_cast<int>(std::ceil(*cfg.n_auto_factor * min_ris_overall(cfg)));
    }
    if (cfg.N < 1) throw ConfigError("N", "must be >= 1 (or auto)");
    return cfg;
}

}  // namespace scbris
