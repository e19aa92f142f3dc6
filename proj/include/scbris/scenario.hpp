#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scbris/errors.hpp"

namespace scbris {

enum class RisScenario { Diffuse, Anomalous };
enum class CancellationMode { Aggregate, PerSymbol };

inline std::string_view to_string(RisScenario s) {
    return s == RisScenario::Diffuse ? "diffuse" : "anomalous";
}

inline std::string_view to_string(CancellationMode c) {
    return c == CancellationMode::Aggregate ? "aggregate" : "per-symbol";
}

inline RisScenario parse_ris_scenario(std::string_view s) {
    if (s == "diffuse") return RisScenario::Diffuse;
    if (s == "anomalous") return RisScenario::Anomalous;
    throw ParseError("unknown RIS scenario '" + std::string(s) + "' (diffuse|anomalous)");
}

inline CancellationMode parse_cancellation_mode(std::string_view s) {
    if (s == "aggregate") return CancellationMode::Aggregate;
    if (s == "per-symbol" || s == "per_symbol" || s == "persymbol") return CancellationMode::PerSymbol;
    throw ParseError("unknown cancellation mode '" + std::string(s) + "' (aggregate|per-symbol)");
}

/// Circuit power budget used for energy efficiency.
struct PowerModel {
    double p_bs_watt = 10.0;
    double p_user_watt = 0.1;
    double p_ris_watt = 0.01;
    double amp_factor = 1.2;  // inverse amplifier efficiency, multiplies p

    bool operator==(const PowerModel&) const = default;
};

/// Thermal noise power in dBm for a given bandwidth (-174 dBm/Hz floor).
inline double noise_power_dbm(double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0)) throw DomainError("noise_power_dbm: bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

inline double dbm_to_watt(double dbm) {
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

inline double watt_to_dbm(double watt) {
    return 10.0 * std::log10(watt) + 30.0;
}

/// Full experiment description. Indices are zero-based throughout the
/// library: cluster m in [0, M), user k in [0, K), user 0 is the weakest
/// (farthest, largest power share) and is decoded first by SIC.
struct ScenarioConfig {
    int M = 2;  // transmit antennas == clusters
    int K = 2;  // users per cluster
    int L = 2;  // receive antennas per user
    int N = 0;  // RIS elements (resolved)
    /// When set, N was requested as "auto*factor": factor * min_ris_overall.
    std::optional<double> n_auto_factor;

    RisScenario ris_scenario = RisScenario::Diffuse;
    CancellationMode cancellation_mode = CancellationMode::Aggregate;
    std::optional<int> resolution_bits;  // absent: ideal RIS

    double d1 = 80.0;
    std::vector<std::vector<double>> d_user;    // [m][k], RIS-user
    std::vector<std::vector<double>> d_direct;  // [m][k], BS-user
    double alpha1 = 2.2;
    double alpha2 = 2.2;
    double alpha3 = 3.5;
    double rician_k1 = 3.0;
    double rician_k2 = 3.0;

    std::vector<double> power_alloc = {0.6, 0.4};  // alpha_k^2
    std::vector<double> target_rate = {1.0, 1.5};  // bits per channel use

    double tx_power_dbm = 30.0;
    double bandwidth_hz = 1e8;
    std::optional<double> noise_dbm_override;

    PowerModel power_model;

    std::uint64_t trials = 100000;
    std::uint64_t master_seed = 20201208;

    double noise_dbm() const {
        return noise_dbm_override ? *noise_dbm_override : noise_power_dbm(bandwidth_hz);
    }
    double noise_watt() const { return dbm_to_watt(noise_dbm()); }
    double tx_power_watt() const { return dbm_to_watt(tx_power_dbm); }
    bool ideal() const { return !resolution_bits.has_value(); }

    bool operator==(const ScenarioConfig&) const = default;
};

/// Two-cluster, two-user geometry of the numerical section. Cluster 2 mirrors
/// cluster 1 (only cluster 1 distances are published). N is left at auto*5.
inline ScenarioConfig baseline_scenario() {
    ScenarioConfig cfg;
    cfg.d_user = {{160.0, 80.0}, {160.0, 80.0}};
    cfg.d_direct = {{200.0, 100.0}, {200.0, 100.0}};
    cfg.n_auto_factor = 5.0;
    return cfg;
}

namespace detail {

inline void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

inline bool positive_finite(double v) {
    return std::isfinite(v) && v > 0.0;
}

}  // namespace detail

/// Structural and physical checks. Throws ConfigError naming the field.
/// N is not checked here (it may still be unresolved); see resolve_config.
inline void validate_scenario(const ScenarioConfig& c) {
    using detail::positive_finite;
    using detail::require;
    require(c.M >= 1, "M", "must be >= 1");
    require(c.K >= 1, "K", "must be >= 1");
    require(c.L >= 1, "L", "must be >= 1");
    require(!c.resolution_bits || (*c.resolution_bits >= 1 && *c.resolution_bits <= 30),
            "ris.resolution_bits", "must be in [1, 30]");
    require(positive_finite(c.d1), "geometry.d1", "must be positive");

    auto check_grid = [&](const std::vector<std::vector<double>>& g, const char* name) {
        require(static_cast<int>(g.size()) == c.M, name,
                "needs one row per cluster (M rows); unspecified entries are not guessed");
        for (const auto& row : g) {
            require(static_cast<int>(row.size()) == c.K, name, "needs K entries per cluster row");
            for (double d : row) require(positive_finite(d), name, "distances must be positive");
        }
    };
    check_grid(c.d_user, "geometry.d_user");
    check_grid(c.d_direct, "geometry.d_direct");

    require(positive_finite(c.alpha1), "geometry.alpha1", "must be positive");
    require(positive_finite(c.alpha2), "geometry.alpha2", "must be positive");
    require(positive_finite(c.alpha3), "geometry.alpha3", "must be positive");
    require(std::isfinite(c.rician_k1) && c.rician_k1 >= 0.0, "geometry.rician_k1", "must be >= 0");
    require(std::isfinite(c.rician_k2) && c.rician_k2 >= 0.0, "geometry.rician_k2", "must be >= 0");

    require(static_cast<int>(c.power_alloc.size()) == c.K, "noma.power_alloc", "needs K entries");
    require(static_cast<int>(c.target_rate.size()) == c.K, "noma.target_rate", "needs K entries");
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < c.power_alloc.size(); ++k) {
        const double a = c.power_alloc[k];
        require(positive_finite(a), "noma.power_alloc", "entries must be positive");
        if (k > 0) {
            require(a <= c.power_alloc[k - 1], "noma.power_alloc",
                    "must be non-increasing in k (user 1 is the weakest)");
        }
        const double t = sum + a;
        comp += std::abs(sum) >= std::abs(a) ? (sum - t) + a : (a - t) + sum;
        sum = t;
    }
    require(std::abs(sum + comp - 1.0) <= 1e-12, "noma.power_alloc", "power allocation must sum to 1");
    for (double r : c.target_rate) {
        require(std::isfinite(r) && r >= 0.0, "noma.target_rate", "rates must be >= 0");
    }

    require(std::isfinite(c.tx_power_dbm), "tx_power_dbm", "must be finite");
    require(positive_finite(c.bandwidth_hz), "bandwidth_hz", "must be positive");
    require(!c.noise_dbm_override || std::isfinite(*c.noise_dbm_override), "noise_dbm_override",
            "must be finite");
    const auto& pm = c.power_model;
    require(std::isfinite(pm.p_bs_watt) && pm.p_bs_watt >= 0.0, "power_model.p_bs_watt", "must be >= 0");
    require(std::isfinite(pm.p_user_watt) && pm.p_user_watt >= 0.0, "power_model.p_user_watt",
            "must be >= 0");
    require(std::isfinite(pm.p_ris_watt) && pm.p_ris_watt >= 0.0, "power_model.p_ris_watt",
            "must be >= 0");
    require(std::isfinite(pm.amp_factor) && pm.amp_factor >= 1.0, "power_model.amp_factor",
            "must be >= 1");
    require(c.trials >= 1, "montecarlo.trials", "must be >= 1");
    require(!c.n_auto_factor || positive_finite(*c.n_auto_factor), "N", "auto factor must be positive");
}

/// Non-fatal observations about the configuration.
inline std::vector<std::string> scenario_warnings(const ScenarioConfig& c) {
    std::vector<std::string> out;
    if (c.ris_scenario == RisScenario::Diffuse && (c.alpha1 >= c.alpha3 || c.alpha2 >= c.alpha3)) {
        out.emplace_back(
            "diffuse scattering with alpha1 or alpha2 >= alpha3: the reflected link is weaker than "
            "the direct link and the required RIS size grows quickly");
    }
    if (c.cancellation_mode == CancellationMode::PerSymbol) {
        out.emplace_back("per-symbol cancellation is an extension: it needs N >= M*K*L*(M-1)");
    }
    return out;
}

}  // namespace scbris
