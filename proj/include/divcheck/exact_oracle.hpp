#pragma once

// Ground truth for P{d | S_n} with S_n ~ Binomial(n, 1/2):
//   * exact big-integer binomial summation,
//   * the roots-of-unity filter in closed cosine form,
//   * seeded Monte Carlo.

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <gmpxx.h>
#include <mpfr.h>

#include "divcheck/approx_value.hpp"
#include "divcheck/residues_special.hpp"
#include "divcheck/theta_engine.hpp"

namespace divcheck {

inline constexpr std::int64_t kDefaultNMax = 20000;

/// Raised when a query exceeds the configured size limit.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sum_{k = 0 mod d} C(n, k) / 2^n, kept exactly.
struct ExactProbability {
    mpz_class numerator;
    std::int64_t log2_denominator = 0;
    double as_real = 0.0;

    [[nodiscard]] std::string numerator_string() const { return numerator.get_str(); }
};

namespace detail {

// numerator / 2^shift rounded to nearest binary64
inline double scaled_to_double(const mpz_class& numerator, std::int64_t shift) {
    mpfr_t x;
    mpfr_init2(x, 53);
    mpfr_set_z(x, numerator.get_mpz_t(), MPFR_RNDN);
    mpfr_div_2ui(x, x, static_cast<unsigned long>(shift), MPFR_RNDN);
    const double out = mpfr_get_d(x, MPFR_RNDN);
    mpfr_clear(x);
    return out;
}

}  // namespace detail

/// Exact P{d | S_n}.  C(n, k) is advanced one index at a time by an exact
/// multiply and divide, and every d-th coefficient is accumulated.
inline ExactProbability exact_probability(const Query& q, std::int64_t n_max = kDefaultNMax) {
    if (q.d < 1) throw std::domain_error("exact_probability: d must be >= 1");
    if (q.n < 1) throw std::domain_error("exact_probability: n must be >= 1");
    if (q.n > n_max)
        throw CapacityError("exact_probability: n=" + std::to_string(q.n) + " exceeds n_max=" + std::to_string(n_max));

    const std::int64_t last = (q.n / q.d) * q.d;
    mpz_class binom = 1;
    mpz_class sum = 1;
    for (std::int64_t k = 0; k < last; ++k) {
        mpz_mul_ui(binom.get_mpz_t(), binom.get_mpz_t(), static_cast<unsigned long>(q.n - k));
        mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), static_cast<unsigned long>(k + 1));
        if ((k + 1) % q.d == 0) sum += binom;
    }
    ExactProbability out;
    out.numerator = std::move(sum);
    out.log2_denominator = q.n;
    out.as_real = detail::scaled_to_double(out.numerator, q.n);
    return out;
}

/// (1/d) sum_{j<d} cos^n(pi j/d) cos(pi j n/d), the real form of
/// (1/d) sum_j ((1 + w^j)/2)^n over the d-th roots of unity w^j.
///
/// Terms j and d - j coincide, so only j < d/2 is summed.  cos^n is taken as
/// exp(n log1p(-2 sin^2(pi j / 2d))) which keeps full relative accuracy for
/// the dominant small-j terms.
inline double char_sum_probability(const Query& q) {
    if (q.d < 1 || q.d > q.n)
        throw std::domain_error("char_sum_probability: need 1 <= d <= n");
    const double n = static_cast<double>(q.n);
    const double two_d = 2.0 * static_cast<double>(q.d);
    const std::int64_t n_red = q.n % (2 * q.d);
    CompensatedSum sum;
    sum.add(1.0);
    for (std::int64_t j = 1; 2 * j < q.d; ++j) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(j) / two_d);
        const double cos_pow = std::exp(n * std::log1p(-2.0 * s * s));
        if (cos_pow < 1e-22) break;  // monotone in j from here on
        sum.add(2.0 * cos_pow * detail::cos_pi_ratio((j * n_red) % (2 * q.d), q.d));
    }
    return sum.value() / static_cast<double>(q.d);
}

/// SplitMix64 finalizer used as a counter-based generator: word i of stream
/// `seed` is mix(seed + (i + 1) * golden).  Any word can be produced
/// independently, so results do not depend on evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
    [[nodiscard]] std::uint64_t at(std::uint64_t counter) const {
        return splitmix64(seed_ + counter * 0x9E3779B97F4A7C15ULL);
    }

private:
    std::uint64_t seed_;
};

/// Seed for a sub-task, derived from the run seed and the task's (n, d).
inline std::uint64_t derive_seed(std::uint64_t seed, const Query& q) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(q.n) * 0x100000001B3ULL +
                                        static_cast<std::uint64_t>(q.d)));
}

struct MCEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

/// Fraction of `samples` Binomial(n, 1/2) draws divisible by d.  Each draw is
/// the popcount of n random bits taken from consecutive counter words.
inline MCEstimate monte_carlo_probability(const Query& q, std::int64_t samples, std::uint64_t seed) {
    if (q.n < 1 || q.d < 1) throw std::domain_error("monte_carlo_probability: need n >= 1 and d >= 1");
    if (samples < 1) throw std::domain_error("monte_carlo_probability: samples must be >= 1");

    const auto n = static_cast<std::uint64_t>(q.n);
    const std::uint64_t words = (n + 63) / 64;
    const unsigned tail_bits = static_cast<unsigned>(n % 64);
    const std::uint64_t tail_mask = tail_bits == 0 ? ~0ULL : (1ULL << tail_bits) - 1;
    const auto d = static_cast<std::uint64_t>(q.d);

    const CounterRng rng(seed);
    std::int64_t hits = 0;
    std::uint64_t counter = 0;
    for (std::int64_t i = 0; i < samples; ++i) {
        std::uint64_t total = 0;
        for (std::uint64_t w = 0; w + 1 < words; ++w) total += std::popcount(rng.at(counter++));
        total += std::popcount(rng.at(counter++) & tail_mask);
        if (total % d == 0) ++hits;
    }
    MCEstimate out;
    out.samples = samples;
    out.seed = seed;
    out.estimate = static_cast<double>(hits) / static_cast<double>(samples);
    out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(samples));
    return out;
}

}  // namespace divcheck
