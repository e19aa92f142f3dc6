// Command-line front end: feasibility | table2 | simulate | analytic | validate.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scbris/scbris.hpp"
#include "scbris/validation.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kGolden = 3, kIo = 4, kAssumption = 5, kValidation = 6 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::string sweep;
    std::string metrics;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string mode;
    std::string cancellation;
    std::string scenario;
    bool no_golden = false;
    bool feasible_only = false;
    bool quiet = false;
    bool dump_trial = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

scbris::ScenarioConfig load_scenario(const CommonOptions& o) {
    using namespace scbris;
    ScenarioConfig cfg;
    if (o.config_path.empty()) {
        cfg = baseline_scenario();
    } else {
        std::string text;
        try {
            text = read_file(o.config_path);
        } catch (const IoError& e) {
            // An unreadable config is a config error, not an output failure.
            throw ConfigError("--config", e.what());
        }
        cfg = load_config(text);
    }
    if (o.trials) cfg.trials = *o.trials;
    if (o.seed) cfg.master_seed = *o.seed;
    if (!o.mode.empty()) {
        if (o.mode == "ideal") cfg.resolution_bits.reset();
        else if (o.mode.rfind("bits=", 0) == 0) cfg.resolution_bits = std::stoi(o.mode.substr(5));
        else throw ParseError("--mode must be 'ideal' or 'bits=B'");
    }
    if (!o.cancellation.empty()) cfg.cancellation_mode = parse_cancellation_mode(o.cancellation);
    if (!o.scenario.empty()) cfg.ris_scenario = parse_ris_scenario(o.scenario);
    return resolve_config(std::move(cfg));
}

scbris::SweepSpec parse_sweep(const std::string& text, const scbris::ScenarioConfig& cfg,
                              const std::string& metrics) {
    using namespace scbris;
    SweepSpec spec;
    if (text.empty()) {
        spec.variable = "tx_power_dbm";
        spec.values = {cfg.tx_power_dbm};
    } else {
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ParseError("--sweep must be VAR=START:STOP:STEP or VAR=v1,v2,...");
        spec.variable = text.substr(0, eq);
        const std::string rhs = text.substr(eq + 1);
        if (rhs.find(':') != std::string::npos) {
            auto parts = detail::split(rhs, ':');
            if (parts.size() != 3) throw ParseError("--sweep range needs START:STOP:STEP");
            const double start = detail::parse_double("--sweep", parts[0]);
            const double stop = detail::parse_double("--sweep", parts[1]);
            const double step = detail::parse_double("--sweep", parts[2]);
            if (!(step > 0.0) || stop < start) throw ParseError("--sweep range needs STEP > 0 and STOP >= START");
            const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
            for (long i = 0; i < count; ++i) spec.values.push_back(start + static_cast<double>(i) * step);
        } else {
            spec.values = detail::parse_list("--sweep", rhs);
        }
    }
    const std::string m = metrics.empty() ? std::string("OP_user,ER_user") : metrics;
    for (auto item : detail::split(m, ',')) spec.metrics.push_back(parse_metric(item));
    return spec;
}

/// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw IoError("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    void finish() {
        stream().flush();
        if (!stream()) throw IoError("write failed");
    }

private:
    std::ofstream file_;
};

int cmd_feasibility(const CommonOptions& o) {
    using namespace scbris;
    const auto cfg = load_scenario(o);
    Output out(o.out_path);
    auto& os = out.stream();
    const auto fb = feasibility_breakdown(cfg);
    os << "cluster,user,min_ris_diffuse,min_ris_anomalous,overall\n";
    for (int m = 0; m < cfg.M; ++m) {
        for (int k = 0; k < cfg.K; ++k) {
            const double d2 = cfg.d_user[m][k], db = cfg.d_direct[m][k];
            const int diffuse = min_ris_diffuse(cfg.M, cfg.d1, d2, db, cfg.alpha1, cfg.alpha2, cfg.alpha3);
            const int anomalous = min_ris_anomalous(cfg.M, cfg.d1, d2, db, cfg.alpha1, cfg.alpha2, cfg.alpha3);
            const int own = cfg.ris_scenario == RisScenario::Diffuse ? diffuse : anomalous;
            os << m + 1 << ',' << k + 1 << ',' << diffuse << ',' << anomalous << ','
               << std::max(own, fb.rank_bound) << '\n';
        }
    }
    os << "scenario," << to_string(cfg.ris_scenario) << '\n';
    os << "amplitude_bound," << fb.amplitude_bound << '\n';
    os << "rank_bound," << fb.rank_bound << '\n';
    os << "overall," << fb.overall << '\n';
    os << "binding," << fb.binding << '\n';
    os << "configured_N," << cfg.N << '\n';
    for (const auto& w : scenario_warnings(cfg)) std::cerr << "warning: " << w << '\n';
    out.finish();
    return kOk;
}

int cmd_table2(const CommonOptions& o) {
    using namespace scbris;
    const auto rows = table2();
    Output out(o.out_path);
    auto& os = out.stream();
    os << "scenario,alpha1,alpha2,alpha3,min_N\n";
    bool match = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << to_string(r.scenario) << ',' << csv_number(r.alpha1) << ',' << csv_number(r.alpha2) << ','
           << csv_number(r.alpha3) << ',' << r.min_n << '\n';
        match = match && r.min_n == kTable2Golden[i];
    }
    out.finish();
    if (!o.no_golden && !match) {
        std::cerr << "table2: values differ from the golden table\n";
        return kGolden;
    }
    return kOk;
}

int cmd_simulate(const CommonOptions& o) {
    using namespace scbris;
    const auto cfg = load_scenario(o);
    const auto spec = parse_sweep(o.sweep, cfg, o.metrics);
    for (const auto& w : scenario_warnings(cfg)) std::cerr << "warning: " << w << '\n';
    EngineOptions eng;
    eng.threads = o.threads;
    eng.feasible_only = o.feasible_only;
    if (!o.quiet) {
        eng.progress = [](std::uint64_t done, std::uint64_t total) {
            if (done == total || done % (64 * 1024) < 1024) {
                std::cerr << "\rtrials " << done << "/" << total << std::flush;
                if (done == total) std::cerr << '\n';
            }
        };
    }
    Output out(o.out_path);
    const auto rows = run_sweep(cfg, spec, eng);
    bool failed = false;
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            std::cerr << "sweep point " << r.variable << "=" << r.value << " failed: " << r.error << '\n';
            failed = true;
        }
    }
    write_csv(out.stream(), rows);
    out.finish();
    if (o.dump_trial) {
        const auto gains = compute_gains(cfg);
        auto rng = trial_stream(cfg.master_seed, 0);
        const auto ch = draw_realization(cfg, rng);
        const auto sys = build_effective_matrix(ch, gains, cfg.cancellation_mode);
        auto pb = solve_passive(sys, cfg.N);
        if (cfg.resolution_bits) pb = quantize(pb, *cfg.resolution_bits);
        std::cerr << "# trial 0 dump: object,row,col,real,imag\n";
        for (Eigen::Index r = 0; r < sys.h_tilde.rows(); ++r)
            for (Eigen::Index c = 0; c < sys.h_tilde.cols(); ++c)
                std::cerr << "h_tilde," << r << ',' << c << ',' << csv_number(sys.h_tilde(r, c).real()) << ','
                          << csv_number(sys.h_tilde(r, c).imag()) << '\n';
        for (Eigen::Index r = 0; r < sys.b_target.size(); ++r)
            std::cerr << "b," << r << ",0," << csv_number(sys.b_target(r).real()) << ','
                      << csv_number(sys.b_target(r).imag()) << '\n';
        for (Eigen::Index r = 0; r < pb.phi.size(); ++r)
            std::cerr << "phi," << r << ",0," << csv_number(pb.phi(r).real()) << ',' << csv_number(pb.phi(r).imag())
                      << '\n';
        for (int m = 0; m < cfg.M; ++m)
            for (int k = 0; k < cfg.K; ++k)
                std::cerr << "residue," << m + 1 << ',' << k + 1 << ','
                          << csv_number(residue(ch, gains, pb, m, k, cfg.cancellation_mode)) << ",0\n";
    }
    return failed ? kValidation : kOk;
}

int cmd_analytic(const CommonOptions& o) {
    using namespace scbris;
    const auto cfg = load_scenario(o);
    auto spec = parse_sweep(o.sweep, cfg, o.metrics.empty() ? std::string("OP_user,ER_user,OP_oma") : o.metrics);
    Output out(o.out_path);
    auto& os = out.stream();
    os << kCsvHeader << '\n';
    bool violated = false;
    const auto fp = config_fingerprint(cfg);
    auto row = [&](const ScenarioConfig& c, double v, int m, int k, std::string_view metric, double est,
                   bool flagged) {
        os << spec.variable << ',' << csv_number(v) << ',' << m << ',' << k << ',' << metric << ','
           << csv_number(est) << ",0,0," << (flagged ? "ideal-rates-infeasible" : "ideal") << ','
           << to_string(c.cancellation_mode) << ',' << to_string(c.ris_scenario) << ',' << fp << '\n';
    };
    for (double v : spec.values) {
        const auto c = apply_sweep_value(cfg, spec.variable, v);
        for (const auto metric : spec.metrics) {
            for (int m = 0; m < c.M; ++m) {
                double pair = 1.0;
                bool pair_flag = false;
                for (int k = 0; k < c.K; ++k) {
                    const auto in = closed_form_inputs(c, m, k);
                    switch (metric) {
                        case Metric::OpUser:
                        case Metric::OpPair: {
                            double p = 1.0;
                            bool flag = false;
                            try {
                                p = op_closed_form(in, k);
                            } catch (const InfeasibleRates&) {
                                flag = true;
                                violated = true;
                            }
                            pair *= p;
                            pair_flag = pair_flag || flag;
                            if (metric == Metric::OpUser) row(c, v, m + 1, k + 1, "OP_user", p, flag);
                            break;
                        }
                        case Metric::OpOma:
                        case Metric::OpOmaPair: {
                            const double p = op_oma(in, k);
                            pair *= p;
                            if (metric == Metric::OpOma) row(c, v, m + 1, k + 1, "OP_oma", p, false);
                            break;
                        }
                        case Metric::ErUser:
                            if (k == c.K - 1) row(c, v, m + 1, k + 1, "ER_user", er_user_K(in), false);
                            else row(c, v, m + 1, k + 1, "ER_ceiling", er_ceiling_user_k(c.power_alloc, k), false);
                            break;
                        default:
                            throw ParseError("analytic: metric '" + std::string(to_string(metric)) +
                                             "' has no closed form");
                    }
                }
                if (metric == Metric::OpPair) row(c, v, m + 1, 0, "OP_pair", pair, pair_flag);
                if (metric == Metric::OpOmaPair) row(c, v, m + 1, 0, "OP_oma_pair", pair, false);
            }
        }
    }
    out.finish();
    if (violated) {
        std::cerr << "analytic: rate targets violate alpha_v^2 - eps_v * sum_{q>v} alpha_q^2 > 0 at some point\n";
        return kAssumption;
    }
    return kOk;
}

int cmd_validate(const CommonOptions& o, bool corrupt_er) {
    using namespace scbris;
    const auto cfg = load_scenario(o);
    ValidationOptions vo;
    vo.engine.threads = o.threads;
    vo.omit_lb_in_er_scale = corrupt_er;
    const auto checks = run_validation(cfg, vo);
    Output out(o.out_path);
    auto& os = out.stream();
    for (const auto& c : checks) {
        os << (c.skipped ? "SKIP" : (c.pass ? "PASS" : "FAIL")) << "  " << c.name << "  " << c.detail << '\n';
    }
    out.finish();
    return all_passed(checks) ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-aided MIMO-NOMA signal-cancellation simulator"};
    app.require_subcommand(1);
    CommonOptions o;
    bool corrupt_er = false;

    auto add_common = [&](CLI::App* sub, bool config_flags) {
        sub->add_option("--out", o.out_path, "Output file (default: stdout)");
        if (!config_flags) return;
        sub->add_option("--config", o.config_path, "Scenario config file (default: built-in baseline)");
        sub->add_option("--trials", o.trials, "Monte Carlo trials");
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
        sub->add_option("--mode", o.mode, "ideal | bits=B");
        sub->add_option("--cancellation", o.cancellation, "aggregate | per-symbol");
        sub->add_option("--scenario", o.scenario, "diffuse | anomalous");
    };

    auto* feas = app.add_subcommand("feasibility", "Minimum RIS sizes per user and overall");
    add_common(feas, true);
    auto* t2 = app.add_subcommand("table2", "Feasibility table at the reference geometry");
    add_common(t2, false);
    t2->add_flag("--no-golden", o.no_golden, "Do not compare against the golden values");
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates as CSV");
    add_common(sim, true);
    sim->add_option("--sweep", o.sweep, "VAR=START:STOP:STEP or VAR=v1,v2,...");
    sim->add_option("--metrics", o.metrics, "Comma-separated metric list");
    sim->add_flag("--feasible-only", o.feasible_only, "Condition statistics on feasible RIS amplitudes");
    sim->add_flag("--quiet", o.quiet, "No progress on stderr");
    sim->add_flag("--dump-trial", o.dump_trial, "Dump trial 0's cancellation system to stderr");
    auto* ana = app.add_subcommand("analytic", "Closed-form curves as CSV");
    add_common(ana, true);
    ana->add_option("--sweep", o.sweep, "VAR=START:STOP:STEP or VAR=v1,v2,...");
    ana->add_option("--metrics", o.metrics, "OP_user,OP_pair,ER_user,OP_oma,OP_oma_pair");
    auto* val = app.add_subcommand("validate", "Monte Carlo versus closed-form checks");
    add_common(val, true);
    val->add_flag("--corrupt-er-scale", corrupt_er, "Negative control: drop L_b from the ER scale");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*feas) return cmd_feasibility(o);
        if (*t2) return cmd_table2(o);
        if (*sim) return cmd_simulate(o);
        if (*ana) return cmd_analytic(o);
        if (*val) return cmd_validate(o, corrupt_er);
    } catch (const scbris::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const scbris::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}
