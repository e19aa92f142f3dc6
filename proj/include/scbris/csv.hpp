#pragma once

#include <charconv>
#include <ostream>
#include <span>
#include <string>

#include "scbris/montecarlo.hpp"

namespace scbris {

inline constexpr std::string_view kCsvHeader =
    "sweep_var,sweep_value,cluster,user,metric,estimate,stderr,trials,mode,cancellation_mode,scenario,"
    "config_fingerprint";

/// Shortest round-trip decimal, '.' separator, no locale.
inline std::string csv_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline void write_csv_row(std::ostream& os, const SweepRow& row) {
    const auto& r = row.result;
    os << row.variable << ',' << csv_number(row.value) << ',' << r.m << ',' << r.k << ',' << r.metric << ','
       << csv_number(r.estimate) << ',' << csv_number(r.std_error) << ',' << r.trials << ',' << row.mode << ','
       << to_string(row.cancellation) << ',' << to_string(row.scenario) << ',' << r.fingerprint << '\n';
}

inline void write_csv(std::ostream& os, std::span<const SweepRow> rows) {
    os << kCsvHeader << '\n';
    for (const auto& row : rows)
        if (row.error.empty()) write_csv_row(os, row);
}

}  // namespace scbris
