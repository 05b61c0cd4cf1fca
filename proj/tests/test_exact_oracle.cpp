#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "divcheck/exact_oracle.hpp"

using namespace divcheck;

namespace {

// Pascal's triangle by additions only; independent of the multiply/divide
// recurrence used by exact_probability.
std::vector<mpz_class> pascal_row(std::int64_t n) {
    std::vector<mpz_class> row{1};
    for (std::int64_t i = 1; i <= n; ++i) {
        std::vector<mpz_class> next(row.size() + 1);
        next.front() = 1;
        next.back() = 1;
        for (std::size_t k = 1; k < row.size(); ++k) next[k] = row[k - 1] + row[k];
        row = std::move(next);
    }
    return row;
}

mpz_class pow2(std::int64_t n) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(n));
    return p;
}

}  // namespace

TEST(ExactProbability, ThreeTrialsByEnumeration) {
    int divisible = 0;
    for (unsigned outcome = 0; outcome < 8; ++outcome)
        if (std::popcount(outcome) % 2 == 0) ++divisible;
    const auto p = exact_probability({3, 2});
    EXPECT_EQ(p.numerator, divisible);
    EXPECT_EQ(p.numerator_string(), "4");
    EXPECT_EQ(p.log2_denominator, 3);
    EXPECT_EQ(p.as_real, 0.5);
}

TEST(ExactProbability, SmallCasesByEnumeration) {
    for (std::int64_t n = 1; n <= 16; ++n)
        for (std::int64_t d = 1; d <= n + 2; ++d) {
            std::int64_t count = 0;
            for (std::uint32_t outcome = 0; outcome < (1u << n); ++outcome)
                if (std::popcount(outcome) % d == 0) ++count;
            ASSERT_EQ(exact_probability({n, d}).numerator, mpz_class(static_cast<long>(count))) << n << ',' << d;
        }
}

TEST(ExactProbability, DivisorTwoIsHalf) {
    for (std::int64_t n = 1; n <= 300; ++n) {
        const auto p = exact_probability({n, 2});
        ASSERT_EQ(p.numerator, pow2(n - 1)) << n;
        ASSERT_EQ(p.as_real, 0.5);
    }
}

TEST(ExactProbability, DivisorOneAndDivisorN) {
    for (std::int64_t n : {1, 5, 64, 1000}) {
        EXPECT_EQ(exact_probability({n, 1}).numerator, pow2(n));
        EXPECT_EQ(exact_probability({n, 1}).as_real, 1.0);
        if (n >= 2) EXPECT_EQ(exact_probability({n, n}).numerator, 2);
    }
    EXPECT_EQ(exact_probability({64, 64}).as_real, std::ldexp(1.0, -63));
}

TEST(ExactProbability, ResidueClassesPartitionTheRow) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::int64_t n = static_cast<std::int64_t>(rng() % 400) + 1;
        const std::int64_t d = static_cast<std::int64_t>(rng() % (n + 3)) + 1;
        const auto row = pascal_row(n);
        std::vector<mpz_class> classes(static_cast<std::size_t>(d));
        for (std::size_t k = 0; k < row.size(); ++k) classes[k % static_cast<std::size_t>(d)] += row[k];
        mpz_class total = 0;
        for (const auto& c : classes) total += c;
        ASSERT_EQ(total, pow2(n));
        ASSERT_EQ(exact_probability({n, d}).numerator, classes[0]) << n << ',' << d;
    }
}

TEST(ExactProbability, LowerBoundFromZeroTerm) {
    for (std::int64_t n = 1; n <= 200; n += 7)
        for (std::int64_t d = 1; d <= n; d += 3) {
            const auto p = exact_probability({n, d});
            ASSERT_GE(p.numerator, 1);
            ASSERT_LE(p.numerator, pow2(n));
            ASSERT_GE(p.as_real, std::ldexp(1.0, -static_cast<int>(n)));
        }
}

TEST(ExactProbability, Errors) {
    EXPECT_THROW(exact_probability({10, 0}), std::domain_error);
    EXPECT_THROW(exact_probability({20001, 3}), CapacityError);
    EXPECT_THROW(exact_probability({101, 3}, 100), CapacityError);
    EXPECT_NO_THROW(exact_probability({100, 3}, 100));
}

TEST(CharSum, Examples) {
    EXPECT_NEAR(char_sum_probability({3, 2}), 0.5, 1e-15);
    for (std::int64_t n : {1, 10, 999}) EXPECT_EQ(char_sum_probability({n, 1}), 1.0);
    EXPECT_NEAR(char_sum_probability({100, 7}), exact_probability({100, 7}).as_real, 1e-12);
}

TEST(CharSum, AgreesWithExactOnGrid) {
    for (std::int64_t n = 2; n <= 2000; n += 37)
        for (std::int64_t d = 2; d <= n; d += 1 + n / 40)
            ASSERT_NEAR(char_sum_probability({n, d}), exact_probability({n, d}).as_real, 1e-12) << n << ',' << d;
}

TEST(CharSum, LargeNStaysAccurate) {
    for (std::int64_t d : {2, 3, 17, 150, 19999})
        EXPECT_NEAR(char_sum_probability({20000, d}), exact_probability({20000, d}).as_real, 1e-12) << d;
}

TEST(CharSum, RejectsOutOfRange) {
    EXPECT_THROW(char_sum_probability({5, 0}), std::domain_error);
    EXPECT_THROW(char_sum_probability({5, 6}), std::domain_error);
}

TEST(MonteCarlo, DivisorOneAlwaysHits) {
    const auto mc = monte_carlo_probability({10, 1}, 1000, 99);
    EXPECT_EQ(mc.estimate, 1.0);
    EXPECT_EQ(mc.std_error, 0.0);
    EXPECT_EQ(mc.samples, 1000);
    EXPECT_EQ(mc.seed, 99u);
}

TEST(MonteCarlo, FairParityWithinFourSigma) {
    const auto mc = monte_carlo_probability({2, 2}, 1'000'000, 12345);
    EXPECT_NEAR(mc.estimate, 0.5, 4.0 * mc.std_error);
}

TEST(MonteCarlo, FiveHundredSevenWithinFourSigma) {
    const double exact = exact_probability({500, 7}).as_real;
    const auto mc = monte_carlo_probability({500, 7}, 1'000'000, 2024);
    EXPECT_NEAR(mc.estimate, exact, 4.0 * mc.std_error);
}

TEST(MonteCarlo, StdErrorFormulaAndDeterminism) {
    const auto a = monte_carlo_probability({129, 5}, 20000, 7);
    const auto b = monte_carlo_probability({129, 5}, 20000, 7);
    const auto c = monte_carlo_probability({129, 5}, 20000, 8);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_NE(a.estimate, c.estimate);
    EXPECT_DOUBLE_EQ(a.std_error, std::sqrt(a.estimate * (1.0 - a.estimate) / 20000.0));
}

TEST(MonteCarlo, WordBoundaryLengthsMatchExact) {
    // n = 64 and 65 exercise the full-word and one-bit tail masks
    for (std::int64_t n : {63, 64, 65, 128}) {
        const double exact = exact_probability({n, 3}).as_real;
        const auto mc = monte_carlo_probability({n, 3}, 400'000, 31);
        EXPECT_NEAR(mc.estimate, exact, 5.0 * mc.std_error) << n;
    }
}

TEST(MonteCarlo, RejectsBadArguments) {
    EXPECT_THROW(monte_carlo_probability({10, 3}, 0, 1), std::domain_error);
    EXPECT_THROW(monte_carlo_probability({0, 3}, 10, 1), std::domain_error);
}

TEST(CounterRng, ReproducibleKnownValues) {
    // SplitMix64 reference outputs for seed 0: state advances by the golden gamma
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
    const CounterRng rng(0);
    EXPECT_EQ(rng.at(0), splitmix64(0));
    EXPECT_EQ(rng.at(1), splitmix64(0x9E3779B97F4A7C15ULL));
}
