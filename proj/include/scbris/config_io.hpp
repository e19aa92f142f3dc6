#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "scbris/errors.hpp"
#include "scbris/pathloss.hpp"
#include "scbris/scenario.hpp"

namespace scbris {

// Config grammar: one "key = value" per line, '#' starts a comment.
// Lists are comma-separated; per-cluster grids separate cluster rows with ';'.
//
//   M = 2
//   N = auto*5            # or an integer
//   geometry.d_user = 160, 80; 160, 80
//   noma.power_alloc = 0.6, 0.4
//   ris.ris_scenario = diffuse

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty()) {
        throw ParseError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
    Int out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty()) {
        throw ParseError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    }
    return out;
}

inline std::vector<double> parse_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    for (auto item : split(v, ',')) out.push_back(parse_double(key, item));
    return out;
}

inline std::vector<std::vector<double>> parse_grid(std::string_view key, std::string_view v) {
    std::vector<std::vector<double>> out;
    for (auto row : split(v, ';')) out.push_back(parse_list(key, row));
    return out;
}

inline std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt_double(v[i]);
    }
    return s;
}

inline std::string fmt_grid(const std::vector<std::vector<double>>& g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) s += "; ";
        s += fmt_list(g[i]);
    }
    return s;
}

}  // namespace detail

/// Parse key/value pairs without interpreting them. Throws ParseError on
/// syntax errors and duplicate keys.
inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": empty key or value");
        }
        if (!kv.emplace(std::string(key), std::string(value)).second) {
            throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
        }
    }
    return kv;
}

/// Apply one key to a config. Throws ParseError for unknown keys and bad values.
inline void apply_config_key(ScenarioConfig& c, std::string_view key, std::string_view v) {
    using namespace detail;
    if (key == "M") c.M = parse_int<int>(key, v);
    else if (key == "K") c.K = parse_int<int>(key, v);
    else if (key == "L") c.L = parse_int<int>(key, v);
    else if (key == "N") {
        if (v.starts_with("auto")) {
            auto rest = trim(v.substr(4));
            c.n_auto_factor = rest.empty() ? 5.0
                              : rest.starts_with("*") ? parse_double(key, trim(rest.substr(1)))
                                                       : throw ParseError("N: expected 'auto' or 'auto*F'");
            c.N = 0;
        } else {
            c.N = parse_int<int>(key, v);
            c.n_auto_factor.reset();
        }
    }
    else if (key == "tx_power_dbm") c.tx_power_dbm = parse_double(key, v);
    else if (key == "bandwidth_hz") c.bandwidth_hz = parse_double(key, v);
    else if (key == "noise_dbm_override") c.noise_dbm_override = parse_double(key, v);
    else if (key == "geometry.d1") c.d1 = parse_double(key, v);
    else if (key == "geometry.d_user") c.d_user = parse_grid(key, v);
    else if (key == "geometry.d_direct") c.d_direct = parse_grid(key, v);
    else if (key == "geometry.alpha1") c.alpha1 = parse_double(key, v);
    else if (key == "geometry.alpha2") c.alpha2 = parse_double(key, v);
    else if (key == "geometry.alpha3") c.alpha3 = parse_double(key, v);
    else if (key == "geometry.rician_k1") c.rician_k1 = parse_double(key, v);
    else if (key == "geometry.rician_k2") c.rician_k2 = parse_double(key, v);
    else if (key == "noma.power_alloc") c.power_alloc = parse_list(key, v);
    else if (key == "noma.target_rate") c.target_rate = parse_list(key, v);
    else if (key == "ris.ris_scenario") c.ris_scenario = parse_ris_scenario(v);
    else if (key == "ris.cancellation_mode") c.cancellation_mode = parse_cancellation_mode(v);
    else if (key == "ris.resolution_bits") {
        if (v == "ideal" || v == "none") c.resolution_bits.reset();
        else c.resolution_bits = parse_int<int>(key, v);
    }
    else if (key == "montecarlo.trials") c.trials = parse_int<std::uint64_t>(key, v);
    else if (key == "montecarlo.master_seed") c.master_seed = parse_int<std::uint64_t>(key, v);
    else if (key == "power_model.p_bs_watt") c.power_model.p_bs_watt = parse_double(key, v);
    else if (key == "power_model.p_user_watt") c.power_model.p_user_watt = parse_double(key, v);
    else if (key == "power_model.p_ris_watt") c.power_model.p_ris_watt = parse_double(key, v);
    else if (key == "power_model.amp_factor") c.power_model.amp_factor = parse_double(key, v);
    else throw ParseError("unknown key '" + std::string(key) + "'");
}

/// Parse, fill defaults, resolve N and validate.
///
/// Defaults are the numerical-section values except the per-user distances,
/// which must always be given. N defaults to auto*5.
inline ScenarioConfig load_config(std::string_view text) {
    ScenarioConfig c;
    c.d_user.clear();
    c.d_direct.clear();
    c.n_auto_factor = 5.0;
    for (const auto& [k, v] : parse_key_values(text)) apply_config_key(c, k, v);
    return resolve_config(std::move(c));
}

/// Canonical text form; load_config(serialize_config(c)) == c for any
/// resolved config.
inline std::string serialize_config(const ScenarioConfig& c) {
    using namespace detail;
    std::ostringstream os;
    os << "M = " << c.M << '\n' << "K = " << c.K << '\n' << "L = " << c.L << '\n';
    if (c.n_auto_factor) os << "N = auto*" << fmt_double(*c.n_auto_factor) << '\n';
    else os << "N = " << c.N << '\n';
    os << "tx_power_dbm = " << fmt_double(c.tx_power_dbm) << '\n';
    os << "bandwidth_hz = " << fmt_double(c.bandwidth_hz) << '\n';
    if (c.noise_dbm_override) os << "noise_dbm_override = " << fmt_double(*c.noise_dbm_override) << '\n';
    os << "geometry.d1 = " << fmt_double(c.d1) << '\n';
    os << "geometry.d_user = " << fmt_grid(c.d_user) << '\n';
    os << "geometry.d_direct = " << fmt_grid(c.d_direct) << '\n';
    os << "geometry.alpha1 = " << fmt_double(c.alpha1) << '\n';
    os << "geometry.alpha2 = " << fmt_double(c.alpha2) << '\n';
    os << "geometry.alpha3 = " << fmt_double(c.alpha3) << '\n';
    os << "geometry.rician_k1 = " << fmt_double(c.rician_k1) << '\n';
    os << "geometry.rician_k2 = " << fmt_double(c.rician_k2) << '\n';
    os << "noma.power_alloc = " << fmt_list(c.power_alloc) << '\n';
    os << "noma.target_rate = " << fmt_list(c.target_rate) << '\n';
    os << "ris.ris_scenario = " << to_string(c.ris_scenario) << '\n';
    os << "ris.cancellation_mode = " << to_string(c.cancellation_mode) << '\n';
    os << "ris.resolution_bits = "
       << (c.resolution_bits ? std::to_string(*c.resolution_bits) : std::string("ideal")) << '\n';
    os << "montecarlo.trials = " << c.trials << '\n';
    os << "montecarlo.master_seed = " << c.master_seed << '\n';
    os << "power_model.p_bs_watt = " << fmt_double(c.power_model.p_bs_watt) << '\n';
    os << "power_model.p_user_watt = " << fmt_double(c.power_model.p_user_watt) << '\n';
    os << "power_model.p_ris_watt = " << fmt_double(c.power_model.p_ris_watt) << '\n';
    os << "power_model.amp_factor = " << fmt_double(c.power_model.amp_factor) << '\n';
    return os.str();
}

/// FNV-1a 64 of the canonical text (includes the master seed), as hex.
inline std::string config_fingerprint(const ScenarioConfig& c) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : serialize_config(c)) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    return out;
}

}  // namespace scbris
