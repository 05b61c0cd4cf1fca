#pragma once

// JSON and CSV renderings of the verifier's outputs.  Reals go out with 17
// significant digits in CSV; JSON uses the shortest representation that
// parses back to the same binary64.

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "divcheck/verifier.hpp"

namespace divcheck {

using ordered_json = nlohmann::ordered_json;

inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline constexpr const char* kScanCsvHeader = "n,d,r,rbar,p_exact,e_approx,beta_half,abs_error,ratio";

inline ordered_json to_json(const ScanRow& r) {
    return {{"n", r.n},           {"d", r.d},
            {"r", r.r},           {"rbar", r.rbar},
            {"p_exact", r.p_exact}, {"e_approx", r.e_approx},
            {"beta_half", r.beta_half}, {"abs_error", r.abs_error},
            {"ratio", r.ratio}};
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
    os << kScanCsvHeader << '\n';
    for (const auto& r : rows)
        os << r.n << ',' << r.d << ',' << r.r << ',' << r.rbar << ',' << format_real(r.p_exact) << ','
           << format_real(r.e_approx) << ',' << format_real(r.beta_half) << ',' << format_real(r.abs_error) << ','
           << format_real(r.ratio) << '\n';
}

inline ordered_json to_json(const SupErrorReport& s) {
    return {{"n", s.n}, {"sup_abs_error", s.sup_abs_error}, {"argmax_d", s.argmax_d}, {"normalized", s.normalized}};
}

inline void write_sup_csv(std::ostream& os, const std::vector<SupErrorReport>& reports) {
    os << "n,sup_abs_error,argmax_d,normalized\n";
    for (const auto& s : reports)
        os << s.n << ',' << format_real(s.sup_abs_error) << ',' << s.argmax_d << ',' << format_real(s.normalized) << '\n';
}

/// "n=100;d=7"
inline std::string format_inputs(const std::vector<NamedValue>& inputs) {
    std::string out;
    for (const auto& [k, v] : inputs) {
        if (!out.empty()) out += ';';
        out += k + '=' + format_real(v);
    }
    return out;
}

inline ordered_json to_json(const ViolationRecord& v) {
    ordered_json in = ordered_json::object();
    for (const auto& [k, x] : v.inputs) in[k] = x;
    return {{"suite", v.suite_name}, {"inputs", in}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"slack", v.slack}};
}

inline ordered_json to_json(const SuiteResult& s) {
    ordered_json vs = ordered_json::array();
    for (const auto& v : s.violations) vs.push_back(to_json(v));
    return {{"name", s.name}, {"checked", s.checked}, {"violations", vs}};
}

inline void write_violations_csv(std::ostream& os, const std::vector<SuiteResult>& suites) {
    os << "suite,inputs,lhs,rhs,slack\n";
    for (const auto& s : suites)
        for (const auto& v : s.violations)
            os << v.suite_name << ',' << format_inputs(v.inputs) << ',' << format_real(v.lhs) << ','
               << format_real(v.rhs) << ',' << format_real(v.slack) << '\n';
}

inline ordered_json to_json(const RegimeDemo& demo) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : demo.admissible)
        pts.push_back({{"d", p.d},
                       {"r", p.r},
                       {"e_approx", p.e_approx},
                       {"e_times_sqrt_n", p.e_times_sqrt_n},
                       {"theorem_ratio", p.theorem_ratio}});
    return {{"n", demo.n},
            {"a1", demo.a1},
            {"a2", demo.a2},
            {"c", demo.c},
            {"phi1", demo.phi1},
            {"phi2", demo.phi2},
            {"phi_order_holds", demo.phi_order_holds},
            {"bound", demo.bound},
            {"admissible_count", demo.admissible.size()},
            {"outcome", demo.admissible.empty() ? "no admissible d" : "admissible d found"},
            {"all_below_inv_sqrt_n", demo.all_below_inv_sqrt_n()},
            {"all_within_bound", demo.all_within_bound()},
            {"admissible", pts}};
}

inline void write_regime_csv(std::ostream& os, const RegimeDemo& demo) {
    os << "n,d,r,e_approx,e_times_sqrt_n,theorem_ratio,bound\n";
    for (const auto& p : demo.admissible)
        os << demo.n << ',' << p.d << ',' << p.r << ',' << format_real(p.e_approx) << ','
           << format_real(p.e_times_sqrt_n) << ',' << format_real(p.theorem_ratio) << ',' << format_real(demo.bound)
           << '\n';
}

/// Splits one CSV line on commas (no quoting is ever emitted).
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace divcheck
