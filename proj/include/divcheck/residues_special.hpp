#pragma once

// Residue arithmetic and the scalar special functions used by the theta
// estimates: Mills' ratio R, phi, psi and the lattice Gaussian sum S(mu, a).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "divcheck/approx_value.hpp"

namespace divcheck {

inline constexpr double kDefaultEps = 1e-13;

/// A (number of trials, divisor) pair.
struct Query {
    std::int64_t n = 1;
    std::int64_t d = 1;

    friend bool operator==(const Query&, const Query&) = default;
};

/// Least residue of n modulo 2d and its complement 2d - r.
struct ResiduePair {
    std::int64_t r = 0;
    std::int64_t rbar = 0;

    friend bool operator==(const ResiduePair&, const ResiduePair&) = default;
};

inline ResiduePair residue_pair(const Query& q) {
    if (q.d < 1 || q.n < 1)
        throw std::domain_error("residue_pair: need n >= 1 and d >= 1");
    const std::int64_t two_d = 2 * q.d;
    const std::int64_t r = q.n % two_d;
    return {r, two_d - r};
}

/// Offset mu in [0,1] and decay a > 0 of the lattice sum S(mu, a).
struct GaussParams {
    double mu = 0.0;
    double a = 1.0;

    [[nodiscard]] double mubar() const { return 1.0 - mu; }
    [[nodiscard]] GaussParams reflected() const { return {mubar(), a}; }
};

/// Validates (mu, a).  mu within 1e-15 of [0,1] is clamped; anything further
/// out is rejected.
inline GaussParams make_gauss_params(double mu, double a) {
    constexpr double kClampWindow = 1e-15;
    if (!(a > 0.0) || !std::isfinite(a))
        throw std::domain_error("gauss params: a must be positive and finite, got " + std::to_string(a));
    if (!(mu >= -kClampWindow && mu <= 1.0 + kClampWindow))
        throw std::domain_error("gauss params: mu outside [0,1], got " + std::to_string(mu));
    return {std::clamp(mu, 0.0, 1.0), a};
}

/// R(x) = e^{x^2/2} \int_x^\infty e^{-t^2/2} dt for x >= 0.
///
/// For x <= 8 this is sqrt(pi/2) e^{x^2/2} erfc(x/sqrt 2); beyond that the
/// Laplace continued fraction 1/(x+ 1/(x+ 2/(x+ 3/(x+ ...)))) is evaluated
/// backwards, which converges faster the larger x gets.
inline double mills_ratio(double x) {
    if (!(x >= 0.0))
        throw std::domain_error("mills_ratio: x must be >= 0");
    if (std::isinf(x)) return 0.0;
    if (x <= 8.0) {
        constexpr double kSqrtHalfPi = 1.2533141373155002512;
        return kSqrtHalfPi * std::exp(0.5 * x * x) * std::erfc(x / std::numbers::sqrt2);
    }
    constexpr int kDepth = 120;
    double t = x;
    for (int k = kDepth; k >= 1; --k) t = x + k / t;
    return 1.0 / t;
}

/// phi(mu, a) = 1 / (sqrt(2a) + 2 a mu)
inline double phi(const GaussParams& p) {
    return 1.0 / (std::sqrt(2.0 * p.a) + 2.0 * p.a * p.mu);
}

/// psi(mu, a) = (1 + phi(mu, a)) e^{-a mu^2}
inline double psi(const GaussParams& p) {
    return (1.0 + phi(p)) * std::exp(-p.a * p.mu * p.mu);
}

/// log psi(mu, a); stays finite where psi itself underflows.
inline double log_psi(const GaussParams& p) {
    return std::log1p(phi(p)) - p.a * p.mu * p.mu;
}

namespace detail {

struct SideSum {
    double sum = 0.0;
    double tail = 0.0;
    std::size_t terms = 0;
};

// sum_{j>=0} exp(-a((x+j)^2 - m^2)) with x >= m >= 0, truncated once the
// geometric majorant of the remaining terms is below rel_eps * partial sum.
inline SideSum one_sided_gauss(double x, double m, double a, double rel_eps) {
    SideSum out;
    CompensatedSum acc;
    for (std::int64_t j = 0;; ++j) {
        const double y = x + static_cast<double>(j);
        acc.add(std::exp(-a * (y - m) * (y + m)));
        ++out.terms;
        // next term and ratio bound for everything after it
        const double y_next = y + 1.0;
        const double next = std::exp(-a * (y_next - m) * (y_next + m));
        const double q = std::exp(-a * (2.0 * y_next + 1.0));
        const double tail = next / (1.0 - q);
        const double partial = acc.value();
        if (tail <= rel_eps * partial || next == 0.0) {
            out.sum = partial;
            out.tail = tail;
            return out;
        }
    }
}

}  // namespace detail

/// S(mu, a) = sum_{h in Z} e^{-a (mu + h)^2}, split as the two one-sided sums
/// over mu + j and (1 - mu) + j.  The relative truncation error is <= eps.
inline ApproxValue lattice_gauss_sum(const GaussParams& p, double eps = kDefaultEps) {
    if (!(p.a > 0.0))
        throw std::domain_error("lattice_gauss_sum: a must be positive");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("lattice_gauss_sum: eps must lie in (0,1)");
    const double lo = std::min(p.mu, p.mubar());
    const double hi = std::max(p.mu, p.mubar());
    // factor out e^{-a lo^2}, the largest term
    const auto near = detail::one_sided_gauss(lo, lo, p.a, 0.5 * eps);
    const auto far = detail::one_sided_gauss(hi, lo, p.a, 0.5 * eps);
    CompensatedSum total;
    total.add(near.sum);
    total.add(far.sum);
    ApproxValue out;
    out.value = total.value();
    out.tail_bound = near.tail + far.tail;
    out.terms_used = near.terms + far.terms;
    out.log_scale = p.a * lo * lo;
    return normalize(out);
}

}  // namespace divcheck
