#pragma once

// Command-line front end.  parse_command_line() turns argv into a RunConfig,
// run() executes it and writes the report.
//
// Exit status: 0 success with zero violations, 1 any violation, 2 usage
// error, 3 capacity error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "divcheck/config.hpp"
#include "divcheck/exact_oracle.hpp"
#include "divcheck/grids.hpp"
#include "divcheck/report.hpp"
#include "divcheck/theta_engine.hpp"
#include "divcheck/verifier.hpp"

namespace divcheck {

enum ExitStatus : int { kExitOk = 0, kExitViolation = 1, kExitUsage = 2, kExitCapacity = 3 };

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s = {"mills", "lemma1", "corollary1", "lemma3", "theorem",
                                               "poisson", "eq210", "all"};
    return s;
}

struct RunConfig {
    std::string command;
    std::optional<std::int64_t> n;
    std::optional<std::int64_t> d;
    std::vector<std::int64_t> n_list;
    std::optional<double> eps;
    std::optional<std::int64_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::int64_t> n_max;
    std::optional<double> a1;
    std::optional<double> a2;
    std::optional<double> c;
    std::string output_path;
    std::string format = "json";
    std::string suite = "all";
    std::string config_path;

    Settings settings;  // config file with the flags above applied
};

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline std::vector<std::int64_t> parse_n_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw UsageError("--n-list: not an integer: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("--n-list: empty list");
    return out;
}

/// Default config location: $DIVCHECK_CONFIG, then the repo's shipped file.
inline std::string default_config_path() {
    if (const char* env = std::getenv("DIVCHECK_CONFIG")) return env;
#ifdef DIVCHECK_DEFAULT_CONFIG
    if (std::filesystem::exists(DIVCHECK_DEFAULT_CONFIG)) return DIVCHECK_DEFAULT_CONFIG;
#endif
    return {};
}

/// Loads the config file and applies flag overrides; validates ranges.
inline void resolve_settings(RunConfig& cfg) {
    const std::string path = cfg.config_path.empty() ? default_config_path() : cfg.config_path;
    cfg.settings = path.empty() ? Settings{} : load_settings(path);
    auto& s = cfg.settings;
    if (cfg.eps) s.eps = *cfg.eps;
    if (cfg.samples) s.samples = *cfg.samples;
    if (cfg.seed) s.seed = *cfg.seed;
    if (cfg.workers) s.workers = *cfg.workers;
    if (cfg.n_max) s.n_max = *cfg.n_max;
    if (cfg.a1) s.demo_a1 = *cfg.a1;
    if (cfg.a2) s.demo_a2 = *cfg.a2;
    if (cfg.c) s.demo_c = *cfg.c;
    if (!(s.eps > 0.0 && s.eps < 1.0)) throw UsageError("--eps: must lie in (0,1)");
    if (s.workers < 1) throw UsageError("--workers: must be >= 1");
    if (s.samples < 1) throw UsageError("--samples: must be >= 1");
    if (s.n_max < 1) throw UsageError("--n-max: must be >= 1");
}

struct ParseOutcome {
    std::optional<RunConfig> config;
    int exit_status = kExitOk;
    std::string message;  // help text or diagnostic
};

inline ParseOutcome parse_command_line(int argc, const char* const* argv) {
    CLI::App app{"Divisibility probabilities of Bernoulli sums and their theta-function approximation", "divcheck"};
    app.require_subcommand(1, 1);
    RunConfig cfg;
    std::string n_list_text;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--eps", cfg.eps, "Relative truncation tolerance for series");
        sub->add_option("--workers", cfg.workers, "Worker threads for scans");
        sub->add_option("--n-max", cfg.n_max, "Largest n accepted");
        sub->add_option("--seed", cfg.seed, "Random seed");
        sub->add_option("--out", cfg.output_path, "Report path (stdout when omitted)");
        sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--config", cfg.config_path, "Config file (defaults to config/defaults.json)");
    };
    auto query = [&](CLI::App* sub) {
        sub->add_option("--n", cfg.n, "Number of Bernoulli trials")->required();
        sub->add_option("--d", cfg.d, "Divisor")->required();
    };

    auto* prob = app.add_subcommand("prob", "Exact and character-sum P{d | S_n}");
    query(prob);
    prob->add_option("--samples", cfg.samples, "Also run a Monte Carlo estimate with this many samples");
    common(prob);

    auto* approx = app.add_subcommand("approx", "E(n,d), beta(n,d) and the Poisson identity gap");
    query(approx);
    common(approx);

    auto* residues = app.add_subcommand("residues", "Least residue of n mod 2d and its complement");
    query(residues);
    common(residues);

    auto* scan = app.add_subcommand("scan", "Sup-error scan over d in [2, n] for each n");
    scan->add_option("--n-list", n_list_text, "Comma-separated n values");
    common(scan);

    auto* verify = app.add_subcommand("verify", "Run inequality suites on the default grids");
    verify->add_option("--suite", cfg.suite, "Suite to run")->check(CLI::IsMember(known_suites()));
    common(verify);

    auto* demo = app.add_subcommand("demo-regime", "Search for divisors in the exponential-correction regime");
    demo->add_option("--n", cfg.n, "Number of Bernoulli trials");
    demo->add_option("--a1", cfg.a1, "A1 in phi1 = sqrt(2 A1 log n)");
    demo->add_option("--a2", cfg.a2, "A2 in phi2 = sqrt(2 A2 log n)");
    demo->add_option("--c", cfg.c, "Constant c in (0,1)");
    common(demo);

    ParseOutcome out;
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out.message = app.help();
        return out;
    } catch (const CLI::CallForAllHelp&) {
        out.message = app.help("", CLI::AppFormatMode::All);
        return out;
    } catch (const CLI::ParseError& e) {
        out.exit_status = kExitUsage;
        out.message = std::string("divcheck: ") + e.what();
        return out;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    try {
        if (!n_list_text.empty()) cfg.n_list = parse_n_list(n_list_text);
        resolve_settings(cfg);
    } catch (const std::invalid_argument& e) {
        out.exit_status = kExitUsage;
        out.message = std::string("divcheck: ") + e.what();
        return out;
    }
    out.config = std::move(cfg);
    return out;
}

namespace detail {

inline ordered_json args_json(const RunConfig& cfg) {
    ordered_json a;
    a["command"] = cfg.command;
    if (cfg.n) a["n"] = *cfg.n;
    if (cfg.d) a["d"] = *cfg.d;
    if (!cfg.n_list.empty()) a["n_list"] = cfg.n_list;
    if (cfg.command == "verify") a["suite"] = cfg.suite;
    a["format"] = cfg.format;
    return a;
}

inline ordered_json config_echo(const RunConfig& cfg) {
    ordered_json c;
    c["args"] = args_json(cfg);
    c["settings"] = to_json(cfg.settings);
    return c;
}

struct Emitted {
    std::string body;
    int status = kExitOk;
    std::vector<std::pair<std::string, std::string>> side_files;  // suffix, content
};

inline Emitted run_prob(const RunConfig& cfg) {
    const Query q{*cfg.n, *cfg.d};
    const auto exact = exact_probability(q, cfg.settings.n_max);
    const std::optional<double> cs = q.d <= q.n ? std::optional<double>(char_sum_probability(q)) : std::nullopt;
    std::optional<MCEstimate> mc;
    if (cfg.samples) mc = monte_carlo_probability(q, cfg.settings.samples, cfg.settings.seed);

    Emitted e;
    if (cfg.format == "json") {
        ordered_json j;
        j["numerator"] = exact.numerator_string();
        j["n"] = q.n;
        j["d"] = q.d;
        j["log2_denominator"] = exact.log2_denominator;
        j["p"] = exact.as_real;
        j["char_sum"] = cs ? ordered_json(*cs) : ordered_json(nullptr);
        if (mc)
            j["monte_carlo"] = {{"estimate", mc->estimate},
                                {"std_error", mc->std_error},
                                {"samples", mc->samples},
                                {"seed", mc->seed}};
        j["config"] = config_echo(cfg);
        e.body = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "n,d,numerator,log2_denominator,p,char_sum";
        if (mc) os << ",mc_estimate,mc_std_error,samples,seed";
        os << '\n'
           << q.n << ',' << q.d << ',' << exact.numerator_string() << ',' << exact.log2_denominator << ','
           << format_real(exact.as_real) << ',' << (cs ? format_real(*cs) : "");
        if (mc)
            os << ',' << format_real(mc->estimate) << ',' << format_real(mc->std_error) << ',' << mc->samples << ','
               << mc->seed;
        os << '\n';
        e.body = os.str();
    }
    return e;
}

inline Emitted run_approx(const RunConfig& cfg) {
    const Query q{*cfg.n, *cfg.d};
    const auto form = select_dual_form(q);
    const auto e = approx_e(q, {.eps = cfg.settings.eps});
    const auto rp = residue_pair(q);
    const auto env = envelope_beta(q);
    const double ratio = theorem_ratio(e, env);
    const double residual = poisson_identity_residual(q);

    Emitted out;
    if (cfg.format == "json") {
        ordered_json j;
        j["n"] = q.n;
        j["d"] = q.d;
        j["r"] = rp.r;
        j["rbar"] = rp.rbar;
        j["form"] = to_string(form);
        j["e_approx"] = e.real();
        j["e_value"] = e.value;
        j["e_log_scale"] = e.log_scale;
        j["tail_bound"] = e.tail_bound;
        j["terms_used"] = e.terms_used;
        j["beta_half"] = env.real_half();
        j["beta_abs"] = env.real_abs();
        j["ratio"] = ratio;
        j["poisson_residual"] = residual;
        j["config"] = config_echo(cfg);
        out.body = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "n,d,r,rbar,form,e_approx,e_value,e_log_scale,tail_bound,terms_used,beta_half,beta_abs,ratio,"
              "poisson_residual\n"
           << q.n << ',' << q.d << ',' << rp.r << ',' << rp.rbar << ',' << to_string(form) << ','
           << format_real(e.real()) << ',' << format_real(e.value) << ',' << format_real(e.log_scale) << ','
           << format_real(e.tail_bound) << ',' << e.terms_used << ',' << format_real(env.real_half()) << ','
           << format_real(env.real_abs()) << ',' << format_real(ratio) << ',' << format_real(residual) << '\n';
        out.body = os.str();
    }
    return out;
}

inline Emitted run_residues(const RunConfig& cfg) {
    const Query q{*cfg.n, *cfg.d};
    const auto rp = residue_pair(q);
    Emitted out;
    if (cfg.format == "json") {
        ordered_json j;
        j["n"] = q.n;
        j["d"] = q.d;
        j["r"] = rp.r;
        j["rbar"] = rp.rbar;
        j["config"] = config_echo(cfg);
        out.body = j.dump(2) + "\n";
    } else {
        out.body = "n,d,r,rbar\n" + std::to_string(q.n) + ',' + std::to_string(q.d) + ',' + std::to_string(rp.r) +
                   ',' + std::to_string(rp.rbar) + '\n';
    }
    return out;
}

inline Emitted run_scan(const RunConfig& cfg) {
    const auto& s = cfg.settings;
    const auto n_list = cfg.n_list.empty() ? s.sup_n_list : cfg.n_list;
    std::vector<ScanRow> rows;
    const auto result = sup_error_scan(n_list, {.eps = s.eps, .n_max = s.n_max, .workers = s.workers}, &rows);

    Emitted out;
    if (cfg.format == "json") {
        ordered_json j;
        ordered_json jr = ordered_json::array();
        for (const auto& r : rows) jr.push_back(to_json(r));
        ordered_json js = ordered_json::array();
        for (const auto& r : result.reports) js.push_back(to_json(r));
        j["rows"] = jr;
        j["sup"] = js;
        j["c_fit"] = result.c_fit;
        j["spot_checks"] = result.spot_checks;
        j["spot_check_max_deviation"] = result.spot_check_max_deviation;
        j["config"] = config_echo(cfg);
        out.body = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        write_scan_csv(os, rows);
        out.body = os.str();
        std::ostringstream sup;
        write_sup_csv(sup, result.reports);
        out.side_files.emplace_back(".sup.csv", sup.str());
    }
    return out;
}

}  // namespace detail

/// Runs the named suites with the grids and tolerances in `s`.
inline std::vector<SuiteResult> run_suites(const std::string& suite, const Settings& s) {
    const bool all = suite == "all";
    std::vector<SuiteResult> out;
    const auto mus = uniform_grid(s.mu_step, 1.0);
    const auto as = log_spaced_reals(s.a_count, s.a_min, s.a_max);
    if (all || suite == "mills") out.push_back(verify_mills_chain(uniform_grid(s.mills_step, s.mills_last), s.inequality_slack));
    if (all || suite == "lemma1") out.push_back(verify_lemma1(mus, as, s.inequality_slack));
    if (all || suite == "corollary1") {
        out.push_back(verify_corollary1(mus, as, s.inequality_slack));
        out.push_back(verify_eq0(as, s.inequality_slack));
    }
    std::vector<Query> grid;
    if (all || suite == "lemma3" || suite == "theorem" || suite == "poisson" || suite == "eq210")
        grid = query_grid(s.theorem_grid);
    if (all || suite == "lemma3") out.push_back(verify_lemma3_cases(grid, s.inequality_slack));
    if (all || suite == "theorem") out.push_back(verify_theorem_sandwich(grid, s.inequality_slack, s.workers, s.eps));
    if (all || suite == "poisson") out.push_back(verify_poisson_identity(grid, s.identity_rel_tol, s.workers));
    if (all || suite == "eq210") out.push_back(verify_eq_2_10(grid, s.eq210_c(), s.inequality_slack, s.workers));
    return out;
}

namespace detail {

inline Emitted run_verify(const RunConfig& cfg) {
    const auto suites = run_suites(cfg.suite, cfg.settings);
    std::size_t total = 0;
    for (const auto& s : suites) total += s.violations.size();

    Emitted out;
    out.status = total == 0 ? kExitOk : kExitViolation;
    if (cfg.format == "json") {
        ordered_json j;
        ordered_json js = ordered_json::array();
        for (const auto& s : suites) js.push_back(to_json(s));
        j["suites"] = js;
        j["total_violations"] = total;
        if (cfg.suite == "all" || cfg.suite == "eq210") j["eq210_c"] = cfg.settings.eq210_c();
        j["config"] = config_echo(cfg);
        out.body = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        write_violations_csv(os, suites);
        out.body = os.str();
    }
    return out;
}

inline Emitted run_demo(const RunConfig& cfg) {
    const auto& s = cfg.settings;
    const auto demo = regime_demo(cfg.n.value_or(s.demo_n), s.demo_a1, s.demo_a2, s.demo_c, s.eps);
    Emitted out;
    out.status = demo.all_below_inv_sqrt_n() && demo.all_within_bound() ? kExitOk : kExitViolation;
    if (cfg.format == "json") {
        auto j = to_json(demo);
        j["config"] = config_echo(cfg);
        out.body = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        write_regime_csv(os, demo);
        out.body = os.str();
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << body;
}

}  // namespace detail

/// Executes a parsed configuration.  The report goes to cfg.output_path, or
/// to `out` when no path is set; diagnostics go to `err`.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        detail::Emitted e;
        if (cfg.command == "prob") e = detail::run_prob(cfg);
        else if (cfg.command == "approx") e = detail::run_approx(cfg);
        else if (cfg.command == "residues") e = detail::run_residues(cfg);
        else if (cfg.command == "scan") e = detail::run_scan(cfg);
        else if (cfg.command == "verify") e = detail::run_verify(cfg);
        else if (cfg.command == "demo-regime") e = detail::run_demo(cfg);
        else {
            err << "divcheck: unknown command '" << cfg.command << "'\n";
            return kExitUsage;
        }
        if (cfg.output_path.empty()) {
            out << e.body;
        } else {
            detail::write_file(cfg.output_path, e.body);
            for (const auto& [suffix, body] : e.side_files) detail::write_file(cfg.output_path + suffix, body);
        }
        return e.status;
    } catch (const CapacityError& ex) {
        err << "divcheck: " << ex.what() << '\n';
        return kExitCapacity;
    } catch (const std::domain_error& ex) {
        err << "divcheck: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& ex) {
        err << "divcheck: " << ex.what() << '\n';
        return kExitUsage;
    }
}

/// Full entry point used by the executable.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    auto parsed = parse_command_line(argc, argv);
    if (!parsed.config) {
        (parsed.exit_status == kExitOk ? out : err) << parsed.message << (parsed.message.ends_with('\n') ? "" : "\n");
        return parsed.exit_status;
    }
    return run(*parsed.config, out, err);
}

}  // namespace divcheck
