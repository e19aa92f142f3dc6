#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "scbris/analytics.hpp"
#include "scbris/beamforming.hpp"
#include "scbris/channel.hpp"
#include "scbris/config_io.hpp"
#include "scbris/link_metrics.hpp"
#include "scbris/pathloss.hpp"
#include "scbris/random.hpp"
#include "scbris/scenario.hpp"

namespace scbris {

enum class Metric { OpUser, OpPair, ErUser, Se, Ee, ResidueMean, FeasibilityRate, OpOma, OpOmaPair };

inline std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::OpUser: return "OP_user";
        case Metric::OpPair: return "OP_pair";
        case Metric::ErUser: return "ER_user";
        case Metric::Se: return "SE";
        case Metric::Ee: return "EE";
        case Metric::ResidueMean: return "residue_mean";
        case Metric::FeasibilityRate: return "feasibility_rate";
        case Metric::OpOma: return "OP_oma";
        case Metric::OpOmaPair: return "OP_oma_pair";
    }
    return "?";
}

inline Metric parse_metric(std::string_view s) {
    for (auto m : {Metric::OpUser, Metric::OpPair, Metric::ErUser, Metric::Se, Metric::Ee, Metric::ResidueMean,
                   Metric::FeasibilityRate, Metric::OpOma, Metric::OpOmaPair})
        if (to_string(m) == s) return m;
    throw ParseError("unknown metric '" + std::string(s) + "'");
}

/// One estimate. m and k are one-based; 0 marks a cluster- or run-level value.
struct EstimatorResult {
    std::string metric;
    int m = 0, k = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    std::string fingerprint;
};

inline EstimatorResult make_result(Metric metric, int m, int k, double est, double se, std::uint64_t n) {
    EstimatorResult r;
    r.metric = std::string(to_string(metric));
    r.m = m;
    r.k = k;
    r.estimate = est;
    r.std_error = se;
    r.ci_low = est - 1.96 * se;
    r.ci_high = est + 1.96 * se;
    r.trials = n;
    return r;
}

/// Compensated (Neumaier) running sum.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    void merge(const KahanSum& o) {
        add(o.sum);
        add(o.comp);
    }
    double value() const { return sum + comp; }
};

struct MeanAccumulator {
    KahanSum s, s2;
    void add(double x) {
        s.add(x);
        s2.add(x * x);
    }
    void merge(const MeanAccumulator& o) {
        s.merge(o.s);
        s2.merge(o.s2);
    }
    double mean(double n) const { return n > 0 ? s.value() / n : 0.0; }
    /// Sample standard deviation over sqrt(n).
    double std_error(double n) const {
        if (n < 2) return 0.0;
        const double mu = mean(n);
        const double var = std::max(0.0, (s2.value() - n * mu * mu) / (n - 1));
        return std::sqrt(var / n);
    }
};

/// Power-independent part of one trial.
struct TrialState {
    std::vector<UserChannelState> users;  // [m*K + k]
    PassiveBeamforming pb;
};

/// Draw channels, solve (and quantize) the RIS, and compute per-user states.
inline TrialState sample_trial(const ScenarioConfig& cfg, const LargeScaleGains& gains, std::uint64_t trial_index) {
    auto rng = trial_stream(cfg.master_seed, trial_index);
    const auto ch = draw_realization(cfg, rng);
    const auto sys = build_effective_matrix(ch, gains, cfg.cancellation_mode);
    TrialState st;
    st.pb = solve_passive(sys, cfg.N);
    if (cfg.resolution_bits) st.pb = quantize(st.pb, *cfg.resolution_bits);
    st.users.reserve(static_cast<std::size_t>(cfg.M * cfg.K));
    for (int m = 0; m < cfg.M; ++m)
        for (int k = 0; k < cfg.K; ++k)
            st.users.push_back(user_channel_state(ch, gains, st.pb, m, k, cfg.cancellation_mode));
    return st;
}

/// One end-to-end realization at the config's transmit power.
inline LinkMetrics run_trial(const ScenarioConfig& cfg, std::uint64_t trial_index) {
    const auto gains = compute_gains(cfg);
    const auto st = sample_trial(cfg, gains, trial_index);
    return evaluate_link_metrics(cfg, st.users, st.pb, cfg.tx_power_watt());
}

struct EngineOptions {
    unsigned threads = 1;        // 0: hardware concurrency
    bool feasible_only = false;  // condition OP/ER/SE/EE on amplitude feasibility
    std::uint64_t block_size = 1024;
    std::function<void(std::uint64_t done, std::uint64_t total)> progress;
};

/// Running sums for one transmit power.
struct PowerAccumulator {
    int M = 0, K = 0;
    double n = 0;  // trials entering OP/ER statistics
    double total = 0;
    double feasible = 0;
    double exact = 0;
    double failures = 0;
    std::vector<KahanSum> outage, oma_outage;            // per user
    std::vector<MeanAccumulator> rate, residue, exact_rate;
    std::vector<KahanSum> outage_cross, oma_cross;       // per cluster K x K
    std::vector<MeanAccumulator> se;                     // per cluster

    PowerAccumulator() = default;
    PowerAccumulator(int m, int k) : M(m), K(k) {
        const auto u = static_cast<std::size_t>(m * k);
        outage.resize(u);
        oma_outage.resize(u);
        rate.resize(u);
        residue.resize(u);
        exact_rate.resize(u);
        outage_cross.resize(static_cast<std::size_t>(m * k * k));
        oma_cross.resize(static_cast<std::size_t>(m * k * k));
        se.resize(static_cast<std::size_t>(m));
    }

    void add(const LinkMetrics& lm, bool include) {
        total += 1;
        if (lm.feasible) feasible += 1;
        if (lm.exact) exact += 1;
        if (!include) return;
        n += 1;
        for (int m = 0; m < M; ++m) {
            double cluster_rate = 0.0;
            for (int k = 0; k < K; ++k) {
                const auto i = lm.idx(m, k);
                outage[i].add(lm.outage[i] ? 1.0 : 0.0);
                oma_outage[i].add(lm.oma_outage[i] ? 1.0 : 0.0);
                rate[i].add(lm.rate[i]);
                residue[i].add(lm.residue[i]);
                exact_rate[i].add(std::log2(1.0 + lm.exact_sinr[i]));
                cluster_rate += lm.rate[i];
                for (int k2 = 0; k2 < K; ++k2) {
                    const auto j = lm.idx(m, k2);
                    const auto c = static_cast<std::size_t>((m * K + k) * K + k2);
                    outage_cross[c].add((lm.outage[i] && lm.outage[j]) ? 1.0 : 0.0);
                    oma_cross[c].add((lm.oma_outage[i] && lm.oma_outage[j]) ? 1.0 : 0.0);
                }
            }
            se[static_cast<std::size_t>(m)].add(cluster_rate);
        }
    }

    void add_failure() {
        total += 1;
        failures += 1;
    }

    void merge(const PowerAccumulator& o) {
        n += o.n;
        total += o.total;
        feasible += o.feasible;
        exact += o.exact;
        failures += o.failures;
        for (std::size_t i = 0; i < outage.size(); ++i) {
            outage[i].merge(o.outage[i]);
            oma_outage[i].merge(o.oma_outage[i]);
            rate[i].merge(o.rate[i]);
            residue[i].merge(o.residue[i]);
            exact_rate[i].merge(o.exact_rate[i]);
        }
        for (std::size_t i = 0; i < outage_cross.size(); ++i) {
            outage_cross[i].merge(o.outage_cross[i]);
            oma_cross[i].merge(o.oma_cross[i]);
        }
        for (std::size_t i = 0; i < se.size(); ++i) se[i].merge(o.se[i]);
    }
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Run cfg.trials trials and evaluate each at every power in powers_watt.
///
/// Trials are grouped in fixed-size blocks; each block is reduced in trial
/// order and blocks are merged in block order, so the result does not
/// depend on the worker count.
inline std::vector<PowerAccumulator> simulate_powers(const ScenarioConfig& cfg, std::span<const double> powers_watt,
                                                     const EngineOptions& opts = {}) {
    const auto gains = compute_gains(cfg);
    const std::uint64_t trials = cfg.trials;
    const std::uint64_t block = std::max<std::uint64_t>(1, opts.block_size);
    const std::uint64_t n_blocks = (trials + block - 1) / block;
    std::vector<std::vector<PowerAccumulator>> partial(
        n_blocks, std::vector<PowerAccumulator>(powers_watt.size(), PowerAccumulator(cfg.M, cfg.K)));

    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> done{0};
    std::mutex progress_mutex;
    auto worker = [&]() {
        while (true) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            auto& acc = partial[b];
            const std::uint64_t end = std::min(trials, (b + 1) * block);
            for (std::uint64_t t = b * block; t < end; ++t) {
                std::optional<TrialState> st;
                try {
                    st = sample_trial(cfg, gains, t);
                } catch (const std::exception&) {
                    for (auto& a : acc) a.add_failure();
                    continue;
                }
                for (std::size_t p = 0; p < powers_watt.size(); ++p) {
                    const auto lm = evaluate_link_metrics(cfg, st->users, st->pb, powers_watt[p]);
                    bool finite = true;
                    for (double r : lm.rate) finite = finite && std::isfinite(r);
                    for (double r : lm.residue) finite = finite && std::isfinite(r);
                    if (!finite) {
                        acc[p].add_failure();
                        continue;
                    }
                    acc[p].add(lm, !opts.feasible_only || lm.feasible);
                }
            }
            const auto d = done.fetch_add(end - b * block) + (end - b * block);
            if (opts.progress) {
                std::lock_guard lock(progress_mutex);
                opts.progress(d, trials);
            }
        }
    };

    const unsigned threads = std::min<std::uint64_t>(resolve_threads(opts.threads), std::max<std::uint64_t>(1, n_blocks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<PowerAccumulator> out(powers_watt.size(), PowerAccumulator(cfg.M, cfg.K));
    for (const auto& blk : partial)
        for (std::size_t p = 0; p < powers_watt.size(); ++p) out[p].merge(blk[p]);
    return out;
}

namespace detail {

inline double proportion_se(double p, double n) {
    return n > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / n) : 0.0;
}

/// Product of per-user outage proportions with a delta-method standard error
/// that accounts for the within-trial correlation between users.
inline std::pair<double, double> product_estimate(const std::vector<KahanSum>& single,
                                                  const std::vector<KahanSum>& cross, int m, int K, double n) {
    std::vector<double> p(static_cast<std::size_t>(K));
    double prod = 1.0;
    for (int k = 0; k < K; ++k) {
        p[static_cast<std::size_t>(k)] = n > 0 ? single[static_cast<std::size_t>(m * K + k)].value() / n : 0.0;
        prod *= p[static_cast<std::size_t>(k)];
    }
    std::vector<double> grad(static_cast<std::size_t>(K), 1.0);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < K; ++j)
            if (j != k) grad[static_cast<std::size_t>(k)] *= p[static_cast<std::size_t>(j)];
    double var = 0.0;
    for (int a = 0; a < K; ++a) {
        for (int b = 0; b < K; ++b) {
            const double exy = n > 0 ? cross[static_cast<std::size_t>((m * K + a) * K + b)].value() / n : 0.0;
            const double cov = exy - p[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(b)];
            var += grad[static_cast<std::size_t>(a)] * grad[static_cast<std::size_t>(b)] * cov;
        }
    }
    return {prod, n > 0 ? std::sqrt(std::max(0.0, var) / n) : 0.0};
}

}  // namespace detail

/// Turn accumulated sums into estimator results for the requested metrics.
inline std::vector<EstimatorResult> summarize(const ScenarioConfig& cfg, const PowerAccumulator& acc,
                                              std::span<const Metric> metrics, double p_watt) {
    std::vector<EstimatorResult> out;
    const double n = acc.n;
    const auto n_u = static_cast<std::uint64_t>(n);
    const auto fp = config_fingerprint(cfg);
    const double p_total = total_power(cfg.power_model, p_watt, cfg.K, cfg.N);
    for (const auto metric : metrics) {
        switch (metric) {
            case Metric::OpUser:
            case Metric::OpOma:
            case Metric::ErUser:
            case Metric::ResidueMean:
                for (int m = 0; m < cfg.M; ++m) {
                    for (int k = 0; k < cfg.K; ++k) {
                        const auto i = static_cast<std::size_t>(m * cfg.K + k);
                        double est = 0.0, se = 0.0;
                        if (metric == Metric::OpUser || metric == Metric::OpOma) {
                            const auto& s = metric == Metric::OpUser ? acc.outage[i] : acc.oma_outage[i];
                            est = n > 0 ? s.value() / n : 0.0;
                            se = detail::proportion_se(est, n);
                        } else {
                            const auto& s = metric == Metric::ErUser ? acc.rate[i] : acc.residue[i];
                            est = s.mean(n);
                            se = s.std_error(n);
                        }
                        out.push_back(make_result(metric, m + 1, k + 1, est, se, n_u));
                    }
                }
                break;
            case Metric::OpPair:
            case Metric::OpOmaPair:
                for (int m = 0; m < cfg.M; ++m) {
                    const auto [est, se] = metric == Metric::OpPair
                                               ? detail::product_estimate(acc.outage, acc.outage_cross, m, cfg.K, n)
                                               : detail::product_estimate(acc.oma_outage, acc.oma_cross, m, cfg.K, n);
                    out.push_back(make_result(metric, m + 1, 0, est, se, n_u));
                }
                break;
            case Metric::Se:
            case Metric::Ee:
                for (int m = 0; m < cfg.M; ++m) {
                    const auto& s = acc.se[static_cast<std::size_t>(m)];
                    const double scale = metric == Metric::Se ? 1.0 : 1.0 / p_total;
                    out.push_back(make_result(metric, m + 1, 0, s.mean(n) * scale, s.std_error(n) * scale, n_u));
                }
                break;
            case Metric::FeasibilityRate: {
                const double valid = acc.total - acc.failures;
                const double est = valid > 0 ? acc.feasible / valid : 0.0;
                out.push_back(make_result(metric, 0, 0, est, detail::proportion_se(est, valid),
                                          static_cast<std::uint64_t>(valid)));
                break;
            }
        }
    }
    for (auto& r : out) {
        r.fingerprint = fp;
        r.failures = static_cast<std::uint64_t>(acc.failures);
    }
    return out;
}

/// Estimate metrics at the config's transmit power.
inline std::vector<EstimatorResult> estimate(const ScenarioConfig& cfg, std::span<const Metric> metrics,
                                             const EngineOptions& opts = {}) {
    if (cfg.trials < 100) throw ConfigError("montecarlo.trials", "estimation needs at least 100 trials");
    const double p = cfg.tx_power_watt();
    const auto acc = simulate_powers(cfg, std::span<const double>(&p, 1), opts);
    return summarize(cfg, acc.front(), metrics, p);
}

/// Single-result convenience: metric for one-based (m, k); k = 0 for
/// cluster-level metrics, m = 0 for run-level ones.
inline EstimatorResult estimate(const ScenarioConfig& cfg, Metric metric, int m, int k,
                                const EngineOptions& opts = {}) {
    const Metric ms[] = {metric};
    for (auto& r : estimate(cfg, ms, opts))
        if (r.m == m && r.k == k) return r;
    throw DomainError("estimate: no result for the requested (m, k)");
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepSpec {
    std::string variable;  // tx_power_dbm | N | N_factor | resolution_bits | L | alpha1 | ...
    std::vector<double> values;
    std::vector<Metric> metrics;
};

struct SweepRow {
    std::string variable;
    double value = 0.0;
    EstimatorResult result;
    std::string mode;  // ideal | b-bit
    CancellationMode cancellation = CancellationMode::Aggregate;
    RisScenario scenario = RisScenario::Diffuse;
    std::string error;  // non-empty when this point failed
};

inline std::string mode_label(const ScenarioConfig& cfg) {
    return cfg.resolution_bits ? std::to_string(*cfg.resolution_bits) + "-bit" : std::string("ideal");
}

/// Apply a sweep value to a copy of cfg and re-resolve N when it is automatic.
inline ScenarioConfig apply_sweep_value(ScenarioConfig cfg, std::string_view var, double v) {
    auto as_int = [&](const char* name) {
        if (v != std::floor(v)) throw ConfigError(name, "sweep value must be an integer");
        return static_cast<int>(v);
    };
    if (var == "tx_power_dbm") cfg.tx_power_dbm = v;
    else if (var == "N") {
        cfg.N = as_int("N");
        cfg.n_auto_factor.reset();
    } else if (var == "N_factor") cfg.n_auto_factor = v;
    else if (var == "resolution_bits") {
        if (v == 0) cfg.resolution_bits.reset();
        else cfg.resolution_bits = as_int("ris.resolution_bits");
    } else if (var == "L") cfg.L = as_int("L");
    else if (var == "alpha1") cfg.alpha1 = v;
    else if (var == "alpha2") cfg.alpha2 = v;
    else if (var == "alpha3") cfg.alpha3 = v;
    else if (var == "rician_k1") cfg.rician_k1 = v;
    else if (var == "rician_k2") cfg.rician_k2 = v;
    else if (var == "rician_k") cfg.rician_k1 = cfg.rician_k2 = v;
    else if (var == "d1") cfg.d1 = v;
    else if (var == "bandwidth_hz") cfg.bandwidth_hz = v;
    else if (var == "trials") cfg.trials = static_cast<std::uint64_t>(as_int("montecarlo.trials"));
    else throw ParseError("unsupported sweep variable '" + std::string(var) + "'");
    return resolve_config(std::move(cfg));
}

/// Monte Carlo sweep. A transmit-power sweep reuses each trial's channel and
/// RIS solution for every power; other variables rerun the trials. Failed
/// points are reported in SweepRow::error and the sweep continues.
inline std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, const SweepSpec& sweep,
                                       const EngineOptions& opts = {}) {
    if (sweep.values.empty()) throw DomainError("run_sweep: empty value list");
    for (double v : sweep.values)
        if (!std::isfinite(v)) throw DomainError("run_sweep: non-finite sweep value");
    std::vector<SweepRow> rows;
    auto emit = [&](const ScenarioConfig& c, double v, const std::vector<EstimatorResult>& res) {
        for (const auto& r : res)
            rows.push_back({sweep.variable, v, r, mode_label(c), c.cancellation_mode, c.ris_scenario, {}});
    };
    auto emit_error = [&](const ScenarioConfig& c, double v, const std::string& what) {
        SweepRow row{sweep.variable, v, {}, mode_label(c), c.cancellation_mode, c.ris_scenario, what};
        rows.push_back(std::move(row));
    };
    if (cfg.trials < 100) throw ConfigError("montecarlo.trials", "estimation needs at least 100 trials");

    if (sweep.variable == "tx_power_dbm") {
        std::vector<double> powers;
        for (double v : sweep.values) powers.push_back(dbm_to_watt(v));
        const auto accs = simulate_powers(cfg, powers, opts);
        for (std::size_t i = 0; i < powers.size(); ++i) {
            auto c = cfg;
            c.tx_power_dbm = sweep.values[i];
            emit(c, sweep.values[i], summarize(c, accs[i], sweep.metrics, powers[i]));
        }
        return rows;
    }
    for (double v : sweep.values) {
        try {
            const auto c = apply_sweep_value(cfg, sweep.variable, v);
            emit(c, v, estimate(c, sweep.metrics, opts));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            emit_error(cfg, v, e.what());
        }
    }
    return rows;
}

}  // namespace scbris
