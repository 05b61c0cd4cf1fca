#pragma once

// Theta(d, m), the approximation E(n, d) = Theta(d, n) / d in its two
// Poisson-dual forms, and the residue envelope beta(n, d).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <mpfr.h>

#include "divcheck/approx_value.hpp"
#include "divcheck/detail/mp_real.hpp"
#include "divcheck/residues_special.hpp"

namespace divcheck {

namespace detail {

/// cos(pi k / d) with the argument reduced exactly in integers first.
inline double cos_pi_ratio(std::int64_t k, std::int64_t d) {
    const std::int64_t two_d = 2 * d;
    k %= two_d;
    if (k < 0) k += two_d;
    if (k > d) k = two_d - k;  // cos is even about pi
    double sign = 1.0;
    if (2 * k > d) {  // cos(pi - x) = -cos x
        k = d - k;
        sign = -1.0;
    }
    // now 0 <= k/d <= 1/2
    const double dd = static_cast<double>(d);
    if (4 * k > d) return sign * std::sin(std::numbers::pi * static_cast<double>(d - 2 * k) / (2.0 * dd));
    return sign * std::cos(std::numbers::pi * static_cast<double>(k) / dd);
}

// log of the majorant 2 e^{-b(L+1)^2} / (1 - e^{-b(2L+3)}) for the terms past L
inline double log_theta_tail(double b, std::int64_t last) {
    const double next = static_cast<double>(last + 1);
    return std::log(2.0) - b * next * next - std::log1p(-std::exp(-b * (2.0 * next + 1.0)));
}

inline ApproxValue from_log_parts(double value_or_mantissa, long exp2, double log_tail) {
    ApproxValue out;
    const double ln_value = std::log(std::abs(value_or_mantissa)) + static_cast<double>(exp2) * std::numbers::ln2;
    if (ln_value > -detail::kFoldableScale) {
        out.value = std::ldexp(value_or_mantissa, static_cast<int>(exp2));
        out.tail_bound = std::exp(log_tail);
    } else {
        out.value = value_or_mantissa;
        out.log_scale = -static_cast<double>(exp2) * std::numbers::ln2;
        out.tail_bound = std::exp(log_tail + out.log_scale);
    }
    return out;
}

struct ThetaAttempt {
    bool accepted = false;
    ApproxValue result;
    double abs_sum = 0.0;  // sum of |terms|, drives the precision choice
};

// Direct binary64 summation; accepted only when the rounding error bound is
// small relative to the result (no severe cancellation).
inline ThetaAttempt theta_direct_double(std::int64_t d, std::int64_t m, double eps) {
    const double dd = static_cast<double>(d);
    const double b = static_cast<double>(m) * std::numbers::pi * std::numbers::pi / (2.0 * dd * dd);
    const std::int64_t m_red = m % (2 * d);
    constexpr double u = 0x1p-53;

    CompensatedSum sum;
    sum.add(1.0);
    double abs_sum = 1.0;
    double err = 0.0;
    std::int64_t ell = 0;
    double log_tail = 0.0;
    for (;;) {
        ++ell;
        const double l = static_cast<double>(ell);
        const double g = std::exp(-b * l * l);
        const double term = 2.0 * g * cos_pi_ratio((m_red * (ell % (2 * d))) % (2 * d), d);
        sum.add(term);
        abs_sum += 2.0 * g;
        err += 2.0 * g * (b * l * l + 4.0) * u;
        log_tail = log_theta_tail(b, ell);
        const double partial = std::abs(sum.value());
        if (log_tail <= std::log(eps * partial) || g == 0.0) break;
    }
    const double value = sum.value();
    err += 2.0 * u * std::abs(value);

    ThetaAttempt out;
    out.abs_sum = abs_sum;
    out.accepted = value > 0.0 && err <= eps * value && log_tail <= std::log(eps * value);
    out.result.value = value;
    out.result.tail_bound = std::exp(log_tail);
    out.result.terms_used = static_cast<std::size_t>(ell) + 1;
    return out;
}

// Multiprecision summation at the given working precision, with the rotation
// e^{i pi m l / d} and the Gaussian factor both advanced by recurrence.
inline ThetaAttempt theta_direct_mp(std::int64_t d, std::int64_t m, double eps, long precision, double abs_sum) {
    const double dd = static_cast<double>(d);
    const double b = static_cast<double>(m) * std::numbers::pi * std::numbers::pi / (2.0 * dd * dd);
    const auto prec = static_cast<mpfr_prec_t>(precision);

    // enough terms to push the tail below the working precision
    const double target = static_cast<double>(precision + 8) * std::numbers::ln2 + std::log(abs_sum);
    auto terms = static_cast<std::int64_t>(std::ceil(std::sqrt(target / b)));
    terms = std::max<std::int64_t>(terms, 1);

    MpReal pi(prec), angle(prec), c(prec), s(prec);
    mpfr_const_pi(pi.get(), MPFR_RNDN);
    mpfr_mul_ui(angle.get(), pi.get(), static_cast<unsigned long>(m % (2 * d)), MPFR_RNDN);
    mpfr_div_ui(angle.get(), angle.get(), static_cast<unsigned long>(d), MPFR_RNDN);
    mpfr_sin_cos(s.get(), c.get(), angle.get(), MPFR_RNDN);

    // b = m pi^2 / (2 d^2)
    MpReal bq(prec), step(prec), ratio2(prec);
    mpfr_sqr(bq.get(), pi.get(), MPFR_RNDN);
    mpfr_mul_ui(bq.get(), bq.get(), static_cast<unsigned long>(m), MPFR_RNDN);
    mpfr_div_ui(bq.get(), bq.get(), static_cast<unsigned long>(2 * d), MPFR_RNDN);
    mpfr_div_ui(bq.get(), bq.get(), static_cast<unsigned long>(d), MPFR_RNDN);
    mpfr_neg(step.get(), bq.get(), MPFR_RNDN);
    mpfr_exp(step.get(), step.get(), MPFR_RNDN);  // e^{-b}
    mpfr_sqr(ratio2.get(), step.get(), MPFR_RNDN);  // e^{-2b}

    MpReal gauss(prec, 1.0), zr(prec, 1.0), zi(prec, 0.0), sum(prec, 0.0);
    MpReal t1(prec), t2(prec), nr(prec);
    for (std::int64_t ell = 1; ell <= terms; ++ell) {
        // z <- z * (c + i s)
        mpfr_mul(t1.get(), zr.get(), c.get(), MPFR_RNDN);
        mpfr_mul(t2.get(), zi.get(), s.get(), MPFR_RNDN);
        mpfr_sub(nr.get(), t1.get(), t2.get(), MPFR_RNDN);
        mpfr_mul(t1.get(), zr.get(), s.get(), MPFR_RNDN);
        mpfr_mul(t2.get(), zi.get(), c.get(), MPFR_RNDN);
        mpfr_add(zi.get(), t1.get(), t2.get(), MPFR_RNDN);
        mpfr_swap(zr.get(), nr.get());
        // e^{-b l^2} = e^{-b (l-1)^2} e^{-b (2l - 1)}
        mpfr_mul(gauss.get(), gauss.get(), step.get(), MPFR_RNDN);
        mpfr_mul(step.get(), step.get(), ratio2.get(), MPFR_RNDN);
        mpfr_mul(t1.get(), gauss.get(), zr.get(), MPFR_RNDN);
        mpfr_add(sum.get(), sum.get(), t1.get(), MPFR_RNDN);
    }
    mpfr_mul_2ui(sum.get(), sum.get(), 1, MPFR_RNDN);
    mpfr_add_ui(sum.get(), sum.get(), 1, MPFR_RNDN);

    ThetaAttempt out;
    out.abs_sum = abs_sum;
    const double log_tail = log_theta_tail(b, terms);
    // each recurrence step loses a few ulps; 16 per term is generous
    const double log_err = std::log(abs_sum) + std::log(16.0 * static_cast<double>(terms + 2)) -
                           static_cast<double>(precision) * std::numbers::ln2;
    if (mpfr_sgn(sum.get()) <= 0) return out;
    long exp2 = 0;
    const double mant = mpfr_get_d_2exp(&exp2, sum.get(), MPFR_RNDN);
    const double log_value = std::log(mant) + static_cast<double>(exp2) * std::numbers::ln2;
    const double log_eps = std::log(eps);
    out.accepted = log_err <= log_eps + log_value && log_tail <= log_eps + log_value;
    out.result = from_log_parts(mant, exp2, log_tail);
    out.result.terms_used = static_cast<std::size_t>(terms) + 1;
    return out;
}

}  // namespace detail

/// Theta(d, m) = sum_l e^{i m pi l / d - m pi^2 l^2 / (2 d^2)}, evaluated as
/// the real series 1 + 2 sum_{l>=1} cos(m pi l / d) e^{-m pi^2 l^2 / (2 d^2)}.
///
/// When d is large against sqrt(m) the series cancels down to a tiny value;
/// the sum is then redone in MPFR at whatever precision the cancellation
/// needs.  The returned value has relative error <= eps.
inline ApproxValue theta_direct(std::int64_t d, std::int64_t m, double eps = kDefaultEps) {
    if (d < 1 || m < 1)
        throw std::domain_error("theta_direct: need d >= 1 and m >= 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("theta_direct: eps must lie in (0,1)");
    auto attempt = detail::theta_direct_double(d, m, eps);
    if (attempt.accepted) return attempt.result;

    // guess the cancellation depth from the binary64 result when it is
    // meaningful, otherwise grow geometrically
    long precision = 128;
    const double abs_sum = attempt.abs_sum;
    if (attempt.result.value > 0.0) {
        const double lost = std::log2(abs_sum / attempt.result.value);
        precision = std::max(precision, static_cast<long>(lost) + 96);
    }
    constexpr long kMaxPrecision = 1L << 20;
    while (precision <= kMaxPrecision) {
        attempt = detail::theta_direct_mp(d, m, eps, precision, abs_sum);
        if (attempt.accepted) return attempt.result;
        precision *= 2;
    }
    throw std::runtime_error("theta_direct: precision limit reached for d=" + std::to_string(d) +
                             ", m=" + std::to_string(m));
}

enum class DualForm { automatic, gaussian, theta };

inline const char* to_string(DualForm f) {
    switch (f) {
        case DualForm::gaussian: return "gaussian";
        case DualForm::theta: return "theta";
        default: return "automatic";
    }
}

struct EOptions {
    double eps = kDefaultEps;
    DualForm form = DualForm::automatic;
    bool allow_d_above_n = false;
};

/// The series with the larger quadratic decay coefficient: the Gaussian dual
/// decays like e^{-2 d^2 h^2 / n}, the direct theta series like
/// e^{-n pi^2 l^2 / (2 d^2)}; they cross at d^2 = pi n / 2.
inline DualForm select_dual_form(const Query& q) {
    const double d2 = static_cast<double>(q.d) * static_cast<double>(q.d);
    return d2 >= std::numbers::pi * static_cast<double>(q.n) / 2.0 ? DualForm::gaussian : DualForm::theta;
}

/// sqrt(2/(pi n)) S(r/(2d), 2d^2/n), mu taken from the integer residue.
inline ApproxValue gaussian_dual_e(const Query& q, double eps = kDefaultEps) {
    const auto rp = residue_pair(q);
    const double two_d = 2.0 * static_cast<double>(q.d);
    const double n = static_cast<double>(q.n);
    const auto params = make_gauss_params(static_cast<double>(rp.r) / two_d,
                                          2.0 * static_cast<double>(q.d) * static_cast<double>(q.d) / n);
    auto s = lattice_gauss_sum(params, eps);
    const double pref = std::sqrt(2.0 / (std::numbers::pi * n));
    s.value *= pref;
    s.tail_bound *= pref;
    return s;
}

/// Theta(d, n) / d through the direct series.
inline ApproxValue theta_dual_e(const Query& q, double eps = kDefaultEps) {
    auto t = theta_direct(q.d, q.n, eps);
    const double dd = static_cast<double>(q.d);
    t.value /= dd;
    t.tail_bound /= dd;
    return t;
}

/// E(n, d) = Theta(d, n) / d.  Requires 1 <= d <= n unless the override is set.
inline ApproxValue approx_e(const Query& q, const EOptions& opt = {}) {
    if (q.d < 1 || q.n < 1)
        throw std::domain_error("approx_e: need n >= 1 and d >= 1");
    if (q.d > q.n && !opt.allow_d_above_n)
        throw std::domain_error("approx_e: d=" + std::to_string(q.d) + " exceeds n=" + std::to_string(q.n));
    const DualForm form = opt.form == DualForm::automatic ? select_dual_form(q) : opt.form;
    return form == DualForm::gaussian ? gaussian_dual_e(q, opt.eps) : theta_dual_e(q, opt.eps);
}

/// beta(n, d) in both normalizations.  beta_half uses max(1/(2d), 1/sqrt n),
/// beta_abs uses max(1/d, 1/sqrt n).  Like ApproxValue, both are stored
/// scaled by exp(log_scale) when they would underflow.
struct Envelope {
    double beta_half = 0.0;
    double beta_abs = 0.0;
    double log_scale = 0.0;

    [[nodiscard]] double real_half() const { return beta_half * std::exp(-log_scale); }
    [[nodiscard]] double real_abs() const { return beta_abs * std::exp(-log_scale); }
};

inline Envelope envelope_from_residues(std::int64_t n, std::int64_t d, const ResiduePair& rp) {
    if (n < 1 || d < 1 || rp.r < 0 || rp.rbar < 0 || rp.r + rp.rbar != 2 * d)
        throw std::domain_error("envelope: inconsistent residues");
    const double nn = static_cast<double>(n);
    const double lo = static_cast<double>(std::min(rp.r, rp.rbar));
    const double r = static_cast<double>(rp.r);
    const double rbar = static_cast<double>(rp.rbar);
    const double scale = lo * lo / (2.0 * nn);
    const double bracket = std::exp(-(r - lo) * (r + lo) / (2.0 * nn)) + std::exp(-(rbar - lo) * (rbar + lo) / (2.0 * nn));
    const double inv_sqrt_n = 1.0 / std::sqrt(nn);
    Envelope e;
    e.beta_half = std::max(1.0 / (2.0 * static_cast<double>(d)), inv_sqrt_n) * bracket;
    e.beta_abs = std::max(1.0 / static_cast<double>(d), inv_sqrt_n) * bracket;
    e.log_scale = scale;
    if (scale <= detail::kFoldableScale) {
        const double f = std::exp(-scale);
        e.beta_half *= f;
        e.beta_abs *= f;
        e.log_scale = 0.0;
    }
    return e;
}

inline Envelope envelope_beta(const Query& q) {
    if (q.d < 2 || q.d > q.n)
        throw std::domain_error("envelope_beta: need 2 <= d <= n, got n=" + std::to_string(q.n) +
                                ", d=" + std::to_string(q.d));
    return envelope_from_residues(q.n, q.d, residue_pair(q));
}

/// E(n, d) / beta_half(n, d), evaluated in the scaled domain.
inline double theorem_ratio(const ApproxValue& e, const Envelope& env) {
    return ratio(e.value, e.log_scale, env.beta_half, env.log_scale);
}

inline constexpr double kIdentityEps = 1e-14;

/// Relative gap between Theta(d, n)/d and the Gaussian-dual E(n, d).
inline double poisson_identity_residual(const Query& q) {
    if (q.d < 2 || q.d > q.n)
        throw std::domain_error("poisson_identity_residual: need 2 <= d <= n");
    return relative_difference(theta_dual_e(q, kIdentityEps), gaussian_dual_e(q, kIdentityEps));
}

}  // namespace divcheck
