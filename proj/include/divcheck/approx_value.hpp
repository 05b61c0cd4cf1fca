#pragma once

// Series results carried together with their truncation bound.
//
// Values that would underflow binary64 (E(n,d) reaches e^{-2500} on the
// default grids) are stored as value * exp(-log_scale).  Every producer
// calls normalize(), so log_scale is zero unless the plain value is below
// the representable range.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace divcheck {

struct ApproxValue {
    double value = 0.0;
    double tail_bound = 0.0;   // same units as value
    std::size_t terms_used = 0;
    double log_scale = 0.0;

    /// The represented quantity as a plain double (may underflow to 0).
    [[nodiscard]] double real() const { return value * std::exp(-log_scale); }

    /// Natural log of |represented quantity|.
    [[nodiscard]] double log_abs() const { return std::log(std::abs(value)) - log_scale; }
};

namespace detail {
// exp(-600) is still a comfortably normal double
inline constexpr double kFoldableScale = 600.0;
}  // namespace detail

/// Folds a moderate log_scale back into value.
inline ApproxValue normalize(ApproxValue v) {
    if (v.log_scale != 0.0 && v.log_scale <= detail::kFoldableScale) {
        const double f = std::exp(-v.log_scale);
        v.value *= f;
        v.tail_bound *= f;
        v.log_scale = 0.0;
    }
    return v;
}

/// x / y for two scaled quantities, computed without leaving the scaled domain.
inline double ratio(double x_value, double x_scale, double y_value, double y_scale) {
    return (x_value / y_value) * std::exp(y_scale - x_scale);
}

inline double ratio(const ApproxValue& x, const ApproxValue& y) {
    return ratio(x.value, x.log_scale, y.value, y.log_scale);
}

/// |x - y| / max(|x|, |y|); zero when both are zero.
inline double relative_difference(const ApproxValue& x, const ApproxValue& y) {
    if (x.value == 0.0 && y.value == 0.0) return 0.0;
    if (x.value == 0.0 || y.value == 0.0) return 1.0;
    // rescale both to the larger one's scale
    const double common = std::min(x.log_scale, y.log_scale);
    const double xs = x.value * std::exp(common - x.log_scale);
    const double ys = y.value * std::exp(common - y.log_scale);
    return std::abs(xs - ys) / std::max(std::abs(xs), std::abs(ys));
}

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

}  // namespace divcheck
