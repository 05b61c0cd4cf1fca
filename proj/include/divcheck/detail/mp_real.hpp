#pragma once

// Minimal RAII handle over an MPFR variable.

#include <mpfr.h>

#include <utility>

namespace divcheck::detail {

class MpReal {
public:
    explicit MpReal(mpfr_prec_t precision) {
        mpfr_init2(v_, precision);
        mpfr_set_zero(v_, 1);
    }
    MpReal(mpfr_prec_t precision, double x) : MpReal(precision) { mpfr_set_d(v_, x, MPFR_RNDN); }
    ~MpReal() {
        if (v_->_mpfr_d != nullptr) mpfr_clear(v_);
    }

    MpReal(const MpReal&) = delete;
    MpReal& operator=(const MpReal&) = delete;
    MpReal(MpReal&& other) noexcept {
        *v_ = *other.v_;
        other.v_->_mpfr_d = nullptr;
    }
    MpReal& operator=(MpReal&& other) noexcept {
        std::swap(*v_, *other.v_);
        return *this;
    }

    mpfr_ptr get() { return v_; }
    [[nodiscard]] mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

}  // namespace divcheck::detail
