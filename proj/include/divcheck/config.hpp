#pragma once

// Run defaults.  The shipped config/defaults.json mirrors Settings{}; a
// partial file overrides only the keys it names.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "divcheck/exact_oracle.hpp"
#include "divcheck/grids.hpp"
#include "divcheck/residues_special.hpp"

namespace divcheck {

/// Normalized sup error max_n sup_d |P - E| n^{3/2} / log^{5/2} n over the
/// default n list, frozen from the reference scan.
inline constexpr double kFrozenPropositionConstant = 0.008026605181376356;

struct Settings {
    int version = 1;
    double eps = kDefaultEps;
    std::int64_t n_max = kDefaultNMax;
    std::uint64_t seed = 20240917;
    std::int64_t samples = 1000000;
    unsigned workers = 1;

    double inequality_slack = 1e-9;
    double identity_rel_tol = 1e-9;

    QueryGridSpec theorem_grid{};
    double mu_step = 0.01;
    std::size_t a_count = 200;
    double a_min = 1e-4;
    double a_max = 1e4;
    double mills_step = 0.01;
    double mills_last = 50.0;

    std::vector<std::int64_t> sup_n_list = {50, 100, 200, 500, 1000, 2000, 5000};
    double prop1_c_fit = kFrozenPropositionConstant;
    double eq210_c_multiplier = 2.0;

    std::int64_t demo_n = 10000;
    double demo_a1 = 1.0;
    double demo_a2 = 1.0;
    double demo_c = 0.5;

    [[nodiscard]] double eq210_c() const { return prop1_c_fit * eq210_c_multiplier; }
};

namespace detail {
template <class T>
void read_if(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) j.at(key).get_to(dst);
}
}  // namespace detail

inline nlohmann::ordered_json to_json(const Settings& s) {
    nlohmann::ordered_json j;
    j["version"] = s.version;
    j["eps"] = s.eps;
    j["n_max"] = s.n_max;
    j["seed"] = s.seed;
    j["samples"] = s.samples;
    j["workers"] = s.workers;
    j["tolerance"] = {{"inequality_slack", s.inequality_slack}, {"identity_rel_tol", s.identity_rel_tol}};
    j["grids"] = {
        {"theorem",
         {{"n_count", s.theorem_grid.n_count},
          {"n_min", s.theorem_grid.n_min},
          {"n_max", s.theorem_grid.n_max},
          {"all_d_up_to", s.theorem_grid.all_d_up_to},
          {"d_per_n", s.theorem_grid.d_per_n}}},
        {"mu_step", s.mu_step},
        {"a_count", s.a_count},
        {"a_min", s.a_min},
        {"a_max", s.a_max},
        {"mills_step", s.mills_step},
        {"mills_last", s.mills_last},
    };
    j["sup_scan"] = {{"n_list", s.sup_n_list}, {"c_fit", s.prop1_c_fit}};
    j["eq210"] = {{"c_multiplier", s.eq210_c_multiplier}};
    j["regime_demo"] = {{"n", s.demo_n}, {"a1", s.demo_a1}, {"a2", s.demo_a2}, {"c", s.demo_c}};
    return j;
}

inline Settings settings_from_json(const nlohmann::json& j, Settings s = {}) {
    using detail::read_if;
    read_if(j, "version", s.version);
    if (s.version != 1) throw std::invalid_argument("config: unsupported version " + std::to_string(s.version));
    read_if(j, "eps", s.eps);
    read_if(j, "n_max", s.n_max);
    read_if(j, "seed", s.seed);
    read_if(j, "samples", s.samples);
    read_if(j, "workers", s.workers);
    if (j.contains("tolerance")) {
        const auto& t = j.at("tolerance");
        read_if(t, "inequality_slack", s.inequality_slack);
        read_if(t, "identity_rel_tol", s.identity_rel_tol);
    }
    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        if (g.contains("theorem")) {
            const auto& t = g.at("theorem");
            read_if(t, "n_count", s.theorem_grid.n_count);
            read_if(t, "n_min", s.theorem_grid.n_min);
            read_if(t, "n_max", s.theorem_grid.n_max);
            read_if(t, "all_d_up_to", s.theorem_grid.all_d_up_to);
            read_if(t, "d_per_n", s.theorem_grid.d_per_n);
        }
        read_if(g, "mu_step", s.mu_step);
        read_if(g, "a_count", s.a_count);
        read_if(g, "a_min", s.a_min);
        read_if(g, "a_max", s.a_max);
        read_if(g, "mills_step", s.mills_step);
        read_if(g, "mills_last", s.mills_last);
    }
    if (j.contains("sup_scan")) {
        read_if(j.at("sup_scan"), "n_list", s.sup_n_list);
        read_if(j.at("sup_scan"), "c_fit", s.prop1_c_fit);
    }
    if (j.contains("eq210")) read_if(j.at("eq210"), "c_multiplier", s.eq210_c_multiplier);
    if (j.contains("regime_demo")) {
        const auto& r = j.at("regime_demo");
        read_if(r, "n", s.demo_n);
        read_if(r, "a1", s.demo_a1);
        read_if(r, "a2", s.demo_a2);
        read_if(r, "c", s.demo_c);
    }
    return s;
}

inline Settings load_settings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path + ": " + e.what());
    }
    return settings_from_json(j);
}

}  // namespace divcheck
