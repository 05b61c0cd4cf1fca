#pragma once

// Grid verification of the theta-function inequalities and the
// sup-error scans for P{d | S_n} against E(n, d).
//
// Every suite returns its failures as data (ViolationRecord); an empty list
// means the inequality held at every grid point within the slack.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divcheck/exact_oracle.hpp"
#include "divcheck/grids.hpp"
#include "divcheck/parallel.hpp"
#include "divcheck/residues_special.hpp"
#include "divcheck/theta_engine.hpp"

namespace divcheck {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2 pi)
inline constexpr double kTheoremLower = 0.5 * kInvSqrt2Pi;      // 1/(2 sqrt(2 pi))
inline constexpr double kTheoremUpper = 32.0 * kInvSqrt2Pi;     // 32/sqrt(2 pi)
inline constexpr double kCaseTwoUpper = 8.0 * kInvSqrt2Pi;      // 8/sqrt(2 pi), 2d does not divide n
inline constexpr double kCaseOneLower = kInvSqrt2Pi;            // E / max(1/(2d), 1/sqrt n), 2d | n
inline constexpr double kCaseOneUpper = 16.0 * kInvSqrt2Pi;

using NamedValue = std::pair<std::string, double>;

struct ViolationRecord {
    std::string suite_name;
    std::vector<NamedValue> inputs;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs; negative beyond -tolerance means failure
};

struct SuiteResult {
    std::string name;
    std::size_t checked = 0;
    std::vector<ViolationRecord> violations;

    [[nodiscard]] bool passed() const { return violations.empty(); }
};

namespace detail {

// Records lhs <= rhs + tol as a check; appends a violation when it fails.
inline void check_le(std::vector<ViolationRecord>& out, const char* suite, double lhs, double rhs, double tol,
                     std::vector<NamedValue> inputs) {
    if (lhs <= rhs + tol) return;
    out.push_back({suite, std::move(inputs), lhs, rhs, rhs - lhs});
}

template <class T>
std::vector<T> flatten(std::vector<std::vector<T>> parts) {
    std::vector<T> out;
    for (auto& p : parts)
        for (auto& v : p) out.push_back(std::move(v));
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scalar inequality suites
// ---------------------------------------------------------------------------

/// 1/(1+x) <= 2/(sqrt(x^2+4)+x) <= R(x) <= 2/(sqrt(x^2+8/pi)+x) <= 2/(1+x)
inline SuiteResult verify_mills_chain(const std::vector<double>& xs, double tol) {
    SuiteResult res{"mills", 0, {}};
    for (double x : xs) {
        const double chain[] = {
            1.0 / (1.0 + x),
            2.0 / (std::sqrt(x * x + 4.0) + x),
            mills_ratio(x),
            2.0 / (std::sqrt(x * x + 8.0 / std::numbers::pi) + x),
            2.0 / (1.0 + x),
        };
        static constexpr const char* kLinks[] = {"mills:1/(1+x)<=lower", "mills:lower<=R", "mills:R<=upper",
                                                 "mills:upper<=2/(1+x)"};
        for (int i = 0; i < 4; ++i) {
            detail::check_le(res.violations, kLinks[i], chain[i], chain[i + 1], tol, {{"x", x}});
            ++res.checked;
        }
    }
    return res;
}

/// sum_{h>=1} e^{-a h (2 mu + h)}, i.e. sum_{h>=1} e^{-a (mu + h)^2} times e^{a mu^2},
/// summed term by term until the terms no longer register.
inline double lemma1_scaled_middle_sum(double mu, double a) {
    CompensatedSum s;
    for (std::int64_t h = 1;; ++h) {
        const double hh = static_cast<double>(h);
        const double term = std::exp(-a * hh * (2.0 * mu + hh));
        s.add(term);
        // terms decrease geometrically once past the peak at h = 1
        if (term <= 1e-18 * s.value() || term == 0.0) break;
    }
    return s.value();
}

/// (phi - 1) e^{-a mu^2} <= sum_{h>=1} e^{-a(mu+h)^2} <= 2 phi e^{-a mu^2},
/// checked after multiplying through by e^{a mu^2}.
inline SuiteResult verify_lemma1(const std::vector<double>& mus, const std::vector<double>& as, double tol) {
    SuiteResult res{"lemma1", 0, {}};
    for (double mu : mus)
        for (double a : as) {
            const auto p = make_gauss_params(mu, a);
            const double f = phi(p);
            const double mid = lemma1_scaled_middle_sum(p.mu, p.a);
            detail::check_le(res.violations, "lemma1:lower", f - 1.0, mid, tol, {{"mu", mu}, {"a", a}});
            detail::check_le(res.violations, "lemma1:upper", mid, 2.0 * f, tol, {{"mu", mu}, {"a", a}});
            res.checked += 2;
        }
    return res;
}

/// S(mu, a) / (psi(mu, a) + psi(1 - mu, a)), all terms kept in the scaled domain.
inline double corollary1_ratio(const GaussParams& p, double eps = kDefaultEps) {
    const auto s = lattice_gauss_sum(p, eps);
    const double denom = std::exp(log_psi(p) + s.log_scale) + std::exp(log_psi(p.reflected()) + s.log_scale);
    return s.value / denom;
}

inline SuiteResult verify_corollary1(const std::vector<double>& mus, const std::vector<double>& as, double tol) {
    SuiteResult res{"corollary1", 0, {}};
    for (double mu : mus)
        for (double a : as) {
            const double q = corollary1_ratio(make_gauss_params(mu, a));
            detail::check_le(res.violations, "corollary1:lower", 0.5, q, tol, {{"mu", mu}, {"a", a}});
            detail::check_le(res.violations, "corollary1:upper", q, 2.0, tol, {{"mu", mu}, {"a", a}});
            res.checked += 2;
        }
    return res;
}

/// (1/2)(1 + 1/sqrt(2a)) <= S(0, a) <= 4(1 + 1/sqrt(2a))
inline SuiteResult verify_eq0(const std::vector<double>& as, double tol) {
    SuiteResult res{"eq0", 0, {}};
    for (double a : as) {
        const double s = lattice_gauss_sum(make_gauss_params(0.0, a)).real();
        const double base = 1.0 + 1.0 / std::sqrt(2.0 * a);
        detail::check_le(res.violations, "eq0:lower", 0.5 * base, s, tol, {{"a", a}});
        detail::check_le(res.violations, "eq0:upper", s, 4.0 * base, tol, {{"a", a}});
        res.checked += 2;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Residue sandwich (n = 2dK + r, 1 <= r <= 2d)
// ---------------------------------------------------------------------------

enum Lemma3Case : unsigned { kCaseA = 1, kCaseB = 2, kCaseC = 4 };

/// Proof cases that apply to (n, d, r): a when 2d <= sqrt n; b when
/// 2d >= sqrt n and r <= sqrt n; c when 2d >= sqrt n and r >= sqrt n.
/// On the boundaries more than one case applies.
inline unsigned lemma3_cases(std::int64_t n, std::int64_t d, std::int64_t r) {
    unsigned out = 0;
    if (4 * d * d <= n) out |= kCaseA;
    if (4 * d * d >= n) {
        if (r * r <= n) out |= kCaseB;
        if (r * r >= n) out |= kCaseC;
    }
    return out;
}

/// psi(r/(2d), 2d^2/n) e^{r^2/(2n)}
inline double lemma3_scaled_psi(std::int64_t n, std::int64_t d, std::int64_t r) {
    const double nn = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    const double rr = static_cast<double>(r);
    const auto p = make_gauss_params(rr / (2.0 * dd), 2.0 * dd * dd / nn);
    return std::exp(log_psi(p) + rr * rr / (2.0 * nn));
}

/// Global and per-case sandwiches for one residue r in [1, 2d].  Both sides
/// are multiplied by e^{r^2/(2n)}.
inline std::vector<ViolationRecord> check_lemma3_point(std::int64_t n, std::int64_t d, std::int64_t r, double tol) {
    std::vector<ViolationRecord> out;
    const double nn = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    const double root = std::sqrt(nn);
    const double middle = lemma3_scaled_psi(n, d, r) / root;
    const double m = std::max(1.0 / (2.0 * dd), 1.0 / root);
    const std::vector<NamedValue> in = {{"n", nn}, {"d", dd}, {"r", static_cast<double>(r)}};

    detail::check_le(out, "lemma3:lower", 0.5 * m, middle, tol, in);
    detail::check_le(out, "lemma3:upper", middle, 2.0 * m, tol, in);
    const unsigned cases = lemma3_cases(n, d, r);
    if (cases & kCaseA) {
        detail::check_le(out, "lemma3:case_a_lower", 1.0 / (4.0 * dd), middle, tol, in);
        detail::check_le(out, "lemma3:case_a_upper", middle, 1.0 / dd, tol, in);
    }
    if (cases & kCaseB) {
        detail::check_le(out, "lemma3:case_b_lower", 1.0 / root, middle, tol, in);
        detail::check_le(out, "lemma3:case_b_upper", middle, 2.0 / root, tol, in);
    }
    if (cases & kCaseC) {
        detail::check_le(out, "lemma3:case_c_lower", 1.0 / root, middle, tol, in);
        detail::check_le(out, "lemma3:case_c_upper", middle, 1.5 / root, tol, in);
    }
    return out;
}

/// Runs check_lemma3_point for r_d(n) and for its complement.  Residues are
/// taken in [1, 2d], so r = 0 is represented by 2d.
inline SuiteResult verify_lemma3_cases(const std::vector<Query>& grid, double tol) {
    SuiteResult res{"lemma3", 0, {}};
    for (const auto& q : grid) {
        const auto rp = residue_pair(q);
        const std::int64_t r = rp.r == 0 ? 2 * q.d : rp.r;
        for (auto v : check_lemma3_point(q.n, q.d, r, tol)) res.violations.push_back(std::move(v));
        ++res.checked;
        if (rp.rbar != r) {
            for (auto v : check_lemma3_point(q.n, q.d, rp.rbar, tol)) res.violations.push_back(std::move(v));
            ++res.checked;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Theorem sandwich and Poisson identity
// ---------------------------------------------------------------------------

struct TheoremPoint {
    Query q;
    double ratio = 0.0;         // E / beta_half
    double case_ratio = 0.0;    // E / max(1/(2d), 1/sqrt n), meaningful when 2d | n
    bool two_d_divides_n = false;
};

inline TheoremPoint theorem_point(const Query& q, double eps = kDefaultEps) {
    const auto e = approx_e(q, {.eps = eps});
    const auto env = envelope_beta(q);
    TheoremPoint tp;
    tp.q = q;
    tp.ratio = theorem_ratio(e, env);
    tp.two_d_divides_n = q.n % (2 * q.d) == 0;
    const double m = std::max(1.0 / (2.0 * static_cast<double>(q.d)), 1.0 / std::sqrt(static_cast<double>(q.n)));
    tp.case_ratio = e.real() / m;
    return tp;
}

/// 1/(2 sqrt(2 pi)) <= E/beta_half <= 32/sqrt(2 pi) everywhere, plus the
/// intermediate bounds: for 2d not dividing n the upper constant is
/// 8/sqrt(2 pi); for 2d | n, E / max(1/(2d), 1/sqrt n) lies in
/// [1/sqrt(2 pi), 16/sqrt(2 pi)].
inline SuiteResult verify_theorem_sandwich(const std::vector<Query>& grid, double tol, unsigned workers = 1,
                                           double eps = kDefaultEps) {
    const auto points = parallel_map(grid.size(), workers, [&](std::size_t i) { return theorem_point(grid[i], eps); });
    SuiteResult res{"theorem", 0, {}};
    for (const auto& tp : points) {
        const std::vector<NamedValue> in = {{"n", static_cast<double>(tp.q.n)}, {"d", static_cast<double>(tp.q.d)}};
        detail::check_le(res.violations, "theorem:lower", kTheoremLower, tp.ratio, tol, in);
        detail::check_le(res.violations, "theorem:upper", tp.ratio, kTheoremUpper, tol, in);
        res.checked += 2;
        if (tp.two_d_divides_n) {
            detail::check_le(res.violations, "theorem:case1_lower", kCaseOneLower, tp.case_ratio, tol, in);
            detail::check_le(res.violations, "theorem:case1_upper", tp.case_ratio, kCaseOneUpper, tol, in);
        } else {
            detail::check_le(res.violations, "theorem:case2_upper", tp.ratio, kCaseTwoUpper, tol, in);
        }
        res.checked += tp.two_d_divides_n ? 2 : 1;
    }
    return res;
}

inline SuiteResult verify_poisson_identity(const std::vector<Query>& grid, double rel_tol, unsigned workers = 1) {
    const auto residuals =
        parallel_map(grid.size(), workers, [&](std::size_t i) { return poisson_identity_residual(grid[i]); });
    SuiteResult res{"poisson", grid.size(), {}};
    for (std::size_t i = 0; i < grid.size(); ++i)
        detail::check_le(res.violations, "poisson:relative_gap", residuals[i], 0.0, rel_tol,
                         {{"n", static_cast<double>(grid[i].n)}, {"d", static_cast<double>(grid[i].d)}});
    return res;
}

// ---------------------------------------------------------------------------
// Sup-error scan
// ---------------------------------------------------------------------------

struct ScanRow {
    std::int64_t n = 0;
    std::int64_t d = 0;
    std::int64_t r = 0;
    std::int64_t rbar = 0;
    double p_exact = 0.0;
    double e_approx = 0.0;
    double beta_half = 0.0;
    double abs_error = 0.0;
    double ratio = 0.0;
};

struct SupErrorReport {
    std::int64_t n = 0;
    double sup_abs_error = 0.0;
    std::int64_t argmax_d = 0;
    double normalized = 0.0;
};

struct ScanOptions {
    double eps = kDefaultEps;
    std::int64_t n_max = kDefaultNMax;
    unsigned workers = 1;
    std::size_t spot_check_stride = 100;  // one exact big-integer check per this many rows
};

struct ScanResult {
    std::vector<SupErrorReport> reports;
    double c_fit = 0.0;
    std::size_t spot_checks = 0;
    double spot_check_max_deviation = 0.0;
};

/// log^{5/2} n / n^{3/2}
inline double proposition_rate(std::int64_t n) {
    const double nn = static_cast<double>(n);
    return std::pow(std::log(nn), 2.5) / std::pow(nn, 1.5);
}

inline ScanRow scan_row(const Query& q, double eps = kDefaultEps) {
    ScanRow row;
    row.n = q.n;
    row.d = q.d;
    const auto rp = residue_pair(q);
    row.r = rp.r;
    row.rbar = rp.rbar;
    row.p_exact = char_sum_probability(q);
    const auto e = approx_e(q, {.eps = eps});
    const auto env = envelope_beta(q);
    row.e_approx = e.real();
    row.beta_half = env.real_half();
    row.abs_error = std::abs(row.p_exact - row.e_approx);
    row.ratio = theorem_ratio(e, env);
    return row;
}

/// Rows for every d in [2, n].
inline std::vector<ScanRow> scan_rows(std::int64_t n, const ScanOptions& opt = {}) {
    if (n < 2) throw std::domain_error("scan_rows: n must be >= 2");
    if (n > opt.n_max)
        throw CapacityError("scan: n=" + std::to_string(n) + " exceeds n_max=" + std::to_string(opt.n_max));
    return parallel_map(static_cast<std::size_t>(n - 1), opt.workers,
                        [&](std::size_t i) { return scan_row({n, static_cast<std::int64_t>(i) + 2}, opt.eps); });
}

/// Reduces rows (ascending d) to the sup report; ties go to the smallest d.
inline SupErrorReport summarize_rows(std::int64_t n, const std::vector<ScanRow>& rows) {
    SupErrorReport rep;
    rep.n = n;
    for (const auto& row : rows)
        if (rep.argmax_d == 0 || row.abs_error > rep.sup_abs_error) {
            rep.sup_abs_error = row.abs_error;
            rep.argmax_d = row.d;
        }
    rep.normalized = rep.sup_abs_error / proposition_rate(n);
    return rep;
}

/// sup_{2<=d<=n} |P{d|S_n} - E(n,d)| per n, with P from the character sum.
/// Every spot_check_stride-th row (and at least one per n) is re-derived
/// with the exact big-integer oracle.  If `rows_out` is given, all rows are
/// appended to it.
inline ScanResult sup_error_scan(const std::vector<std::int64_t>& n_list, const ScanOptions& opt = {},
                                 std::vector<ScanRow>* rows_out = nullptr) {
    for (auto n : n_list) {
        if (n < 2) throw std::domain_error("sup_error_scan: every n must be >= 2");
        if (n > opt.n_max)
            throw CapacityError("sup_error_scan: n=" + std::to_string(n) + " exceeds n_max=" + std::to_string(opt.n_max));
    }
    ScanResult out;
    std::size_t row_index = 0;
    for (auto n : n_list) {
        auto rows = scan_rows(n, opt);
        auto rep = summarize_rows(n, rows);
        out.c_fit = std::max(out.c_fit, rep.normalized);
        out.reports.push_back(rep);

        std::vector<std::size_t> spots;
        for (std::size_t i = 0; i < rows.size(); ++i, ++row_index)
            if (row_index % opt.spot_check_stride == 0) spots.push_back(i);
        if (spots.empty()) spots.push_back(0);
        const auto devs = parallel_map(spots.size(), opt.workers, [&](std::size_t k) {
            const auto& row = rows[spots[k]];
            return std::abs(exact_probability({row.n, row.d}, opt.n_max).as_real - row.p_exact);
        });
        for (double dev : devs) out.spot_check_max_deviation = std::max(out.spot_check_max_deviation, dev);
        out.spot_checks += spots.size();

        if (rows_out) rows_out->insert(rows_out->end(), rows.begin(), rows.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regime bounds for |P - 1/d|
// ---------------------------------------------------------------------------

/// |P - 1/d| <= C (log^{5/2} n / n^{3/2} + e^{-n pi^2 / (2 d^2)} / d) for d <= sqrt n,
/// |P - 1/d| <= C / sqrt n for sqrt n <= d <= n.  At d = sqrt n either bound
/// suffices.
inline SuiteResult verify_eq_2_10(const std::vector<Query>& grid, double c, double tol, unsigned workers = 1) {
    const auto probs = parallel_map(grid.size(), workers, [&](std::size_t i) { return char_sum_probability(grid[i]); });
    SuiteResult res{"eq210", grid.size(), {}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& q = grid[i];
        const double nn = static_cast<double>(q.n);
        const double dd = static_cast<double>(q.d);
        const double dev = std::abs(probs[i] - 1.0 / dd);
        const bool small = q.d * q.d <= q.n;
        const bool large = q.d * q.d >= q.n;
        const double small_bound =
            c * (proposition_rate(q.n) + std::exp(-nn * std::numbers::pi * std::numbers::pi / (2.0 * dd * dd)) / dd);
        const double large_bound = c / std::sqrt(nn);
        const bool ok = (small && dev <= small_bound + tol) || (large && dev <= large_bound + tol);
        if (!ok) {
            const double rhs = small && large ? std::max(small_bound, large_bound) : (small ? small_bound : large_bound);
            res.violations.push_back({small ? "eq210:small_d" : "eq210:large_d",
                                      {{"n", nn}, {"d", dd}, {"C", c}},
                                      dev,
                                      rhs,
                                      rhs - dev});
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Regime demonstration
// ---------------------------------------------------------------------------

struct RegimePoint {
    std::int64_t d = 0;
    std::int64_t r = 0;
    double e_approx = 0.0;
    double e_times_sqrt_n = 0.0;  // < 1 means E < n^{-1/2}
    double theorem_ratio = 0.0;
};

struct RegimeDemo {
    std::int64_t n = 0;
    double a1 = 0.0;
    double a2 = 0.0;
    double c = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    bool phi_order_holds = false;  // 1 <= phi1 <= c phi2
    double bound = 0.0;            // C max(n^{-1/2-A1}, n^{-1/2-(1-c)^2 A2}), C = 2 * 32/sqrt(2 pi)
    std::vector<RegimePoint> admissible;

    [[nodiscard]] bool all_below_inv_sqrt_n() const {
        return std::all_of(admissible.begin(), admissible.end(), [](const RegimePoint& p) { return p.e_times_sqrt_n < 1.0; });
    }
    [[nodiscard]] bool all_within_bound() const {
        return std::all_of(admissible.begin(), admissible.end(), [&](const RegimePoint& p) { return p.e_approx <= bound; });
    }
};

/// With phi_i = sqrt(2 A_i log n), lists every d with 2d >= sqrt(n) phi2 and
/// sqrt(n) phi1 <= r_d(n) <= c sqrt(n) phi2, and evaluates E(n, d) there.
inline RegimeDemo regime_demo(std::int64_t n, double a1, double a2, double c, double eps = kDefaultEps) {
    if (n < 2) throw std::domain_error("regime_demo: n must be >= 2");
    if (!(a1 > 0.0) || !(a2 >= a1)) throw std::domain_error("regime_demo: need 0 < A1 <= A2");
    if (!(c > 0.0 && c < 1.0)) throw std::domain_error("regime_demo: c must lie in (0,1)");
    RegimeDemo demo;
    demo.n = n;
    demo.a1 = a1;
    demo.a2 = a2;
    demo.c = c;
    const double nn = static_cast<double>(n);
    const double root = std::sqrt(nn);
    demo.phi1 = std::sqrt(2.0 * a1 * std::log(nn));
    demo.phi2 = std::sqrt(2.0 * a2 * std::log(nn));
    demo.phi_order_holds = 1.0 <= demo.phi1 && demo.phi1 <= c * demo.phi2;
    demo.bound = 2.0 * kTheoremUpper *
                 std::max(std::pow(nn, -0.5 - a1), std::pow(nn, -0.5 - (1.0 - c) * (1.0 - c) * a2));
    for (std::int64_t d = 2; d <= n; ++d) {
        if (2.0 * static_cast<double>(d) < root * demo.phi2) continue;
        const std::int64_t r = n % (2 * d);
        const double rr = static_cast<double>(r);
        if (rr < root * demo.phi1 || rr > c * root * demo.phi2) continue;
        const Query q{n, d};
        const auto e = approx_e(q, {.eps = eps});
        RegimePoint p;
        p.d = d;
        p.r = r;
        p.e_approx = e.real();
        p.e_times_sqrt_n = p.e_approx * root;
        p.theorem_ratio = theorem_ratio(e, envelope_beta(q));
        demo.admissible.push_back(p);
    }
    return demo;
}

}  // namespace divcheck
