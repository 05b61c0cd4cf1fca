#pragma once

// Parameter grids shared by the verification suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include "divcheck/residues_special.hpp"

namespace divcheck {

/// `count` strictly increasing integers spread geometrically over [lo, hi],
/// starting at lo and ending at hi.  Collisions at the low end are bumped up.
inline std::vector<std::int64_t> log_spaced_integers(std::size_t count, std::int64_t lo, std::int64_t hi) {
    if (count == 0) return {};
    if (lo < 1 || hi < lo || static_cast<std::int64_t>(count) > hi - lo + 1)
        throw std::invalid_argument("log_spaced_integers: range too small for count");
    std::vector<std::int64_t> out;
    out.reserve(count);
    const double ratio = std::log(static_cast<double>(hi) / static_cast<double>(lo));
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        auto v = static_cast<std::int64_t>(std::llround(static_cast<double>(lo) * std::exp(ratio * t)));
        if (!out.empty()) v = std::max(v, out.back() + 1);
        v = std::min(v, hi - static_cast<std::int64_t>(count - 1 - i));
        out.push_back(v);
    }
    return out;
}

/// `count` reals spread geometrically over [lo, hi].
inline std::vector<double> log_spaced_reals(std::size_t count, double lo, double hi) {
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(lo * std::pow(hi / lo, t));
    }
    return out;
}

/// {0, step, 2 step, ..., last}, each point computed as i * step.
inline std::vector<double> uniform_grid(double step, double last) {
    const auto count = static_cast<std::size_t>(std::llround(last / step)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(static_cast<double>(i) * step);
    return out;
}

/// Divisors d in [2, n] for which n mod 2d is in {0, 1, d, 2d - 1}.
inline std::vector<std::int64_t> residue_extreme_divisors(std::int64_t n) {
    std::vector<std::int64_t> out;
    for (std::int64_t d = 2; d <= n; ++d) {
        const std::int64_t r = n % (2 * d);
        if (r == 0 || r == 1 || r == d || r == 2 * d - 1) out.push_back(d);
    }
    return out;
}

/// The divisor choice for one n: all of [2, n] when n <= all_up_to, otherwise
/// at least `count` values.  The sample always contains the residue
/// extremes, the divisors whose residue sits closest to sqrt(n), the
/// boundaries 2d = sqrt(n), d = sqrt(n) and the dual-form switch
/// d^2 = pi n / 2; the rest is filled geometrically.
inline std::vector<std::int64_t> stratified_divisors(std::int64_t n, std::size_t count, std::int64_t all_up_to) {
    if (n < 2) return {};
    std::vector<std::int64_t> all;
    if (n <= all_up_to || static_cast<std::int64_t>(count) >= n - 1) {
        for (std::int64_t d = 2; d <= n; ++d) all.push_back(d);
        return all;
    }
    std::set<std::int64_t> pick;
    auto add = [&](double d) {
        const auto v = static_cast<std::int64_t>(d);
        if (v >= 2 && v <= n) pick.insert(v);
    };
    const double nn = static_cast<double>(n);
    const double root = std::sqrt(nn);
    for (double v : {2.0, 3.0, nn - 1.0, nn, std::floor(root), std::ceil(root), std::floor(root / 2.0),
                     std::ceil(root / 2.0), std::floor(std::sqrt(std::numbers::pi * nn / 2.0)),
                     std::ceil(std::sqrt(std::numbers::pi * nn / 2.0))})
        add(v);
    for (auto d : residue_extreme_divisors(n)) pick.insert(d);

    // residues nearest sqrt(n), among divisors with 2d > sqrt(n)
    std::vector<std::pair<double, std::int64_t>> near_root;
    for (std::int64_t d = 2; d <= n; ++d) {
        if (2.0 * static_cast<double>(d) <= root) continue;
        near_root.emplace_back(std::abs(static_cast<double>(n % (2 * d)) - root), d);
    }
    std::sort(near_root.begin(), near_root.end());
    for (std::size_t i = 0; i < near_root.size() && i < 8; ++i) pick.insert(near_root[i].second);

    for (std::size_t extra = count; pick.size() < count; extra += count / 4 + 1) {
        const auto fill = log_spaced_integers(std::min<std::size_t>(extra, static_cast<std::size_t>(n - 1)), 2, n);
        for (auto d : fill) {
            if (pick.size() >= count) break;
            pick.insert(d);
        }
    }
    return {pick.begin(), pick.end()};
}

struct QueryGridSpec {
    std::size_t n_count = 60;
    std::int64_t n_min = 2;
    std::int64_t n_max = 5000;
    std::int64_t all_d_up_to = 200;
    std::size_t d_per_n = 200;
};

inline std::vector<Query> query_grid(const QueryGridSpec& spec) {
    std::vector<Query> out;
    for (auto n : log_spaced_integers(spec.n_count, spec.n_min, spec.n_max))
        for (auto d : stratified_divisors(n, spec.d_per_n, spec.all_d_up_to)) out.push_back({n, d});
    return out;
}

}  // namespace divcheck
