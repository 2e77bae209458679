#pragma once

// Sign-and-log representation of real numbers.
//
// High-order moment work routinely produces magnitudes like sigma^200 or
// 199!!, far outside double range. All such quantities are carried as
// (sign, log|value|) pairs and only exponentiated at the very end, after
// roots and ratios have brought them back to representable scale.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace xdldi {

struct SignedLogValue {
    // sign is 0 exactly when the represented value is 0; log_magnitude is
    // then meaningless and kept at -inf.
    int sign = 0;
    double log_magnitude = -std::numeric_limits<double>::infinity();

    static SignedLogValue zero() { return {}; }
    static SignedLogValue one() { return {1, 0.0}; }

    static SignedLogValue from_log(int sign, double log_magnitude) {
        if (sign == 0) return zero();
        return {sign > 0 ? 1 : -1, log_magnitude};
    }

    static SignedLogValue from_value(double v) {
        if (v == 0.0) return zero();
        if (!std::isfinite(v))
            throw std::invalid_argument("SignedLogValue: non-finite input");
        return {v > 0.0 ? 1 : -1, std::log(std::abs(v))};
    }

    bool is_zero() const { return sign == 0; }

    // May overflow to +-inf or underflow to 0 when the represented value
    // leaves double range; callers that care stay in log space.
    double value() const {
        if (sign == 0) return 0.0;
        return static_cast<double>(sign) * std::exp(log_magnitude);
    }

    SignedLogValue negate() const {
        return {-sign, log_magnitude};
    }

    // value^n for integer n >= 0, with 0^0 = 1.
    SignedLogValue pow_int(long n) const {
        if (n < 0) throw std::invalid_argument("SignedLogValue::pow_int: negative exponent");
        if (n == 0) return one();
        if (sign == 0) return zero();
        const int s = (n % 2 == 0) ? 1 : sign;
        return {s, static_cast<double>(n) * log_magnitude};
    }

    // Real odd root: sign(x) * |x|^(1/m) for odd m >= 1.
    SignedLogValue odd_root(long m) const {
        if (m < 1 || m % 2 == 0)
            throw std::invalid_argument("SignedLogValue::odd_root: index must be odd and positive");
        if (sign == 0) return zero();
        return {sign, log_magnitude / static_cast<double>(m)};
    }
};

inline SignedLogValue operator*(const SignedLogValue& a, const SignedLogValue& b) {
    if (a.sign == 0 || b.sign == 0) return SignedLogValue::zero();
    return {a.sign * b.sign, a.log_magnitude + b.log_magnitude};
}

inline SignedLogValue operator/(const SignedLogValue& a, const SignedLogValue& b) {
    if (b.sign == 0) throw std::domain_error("SignedLogValue: division by zero");
    if (a.sign == 0) return SignedLogValue::zero();
    return {a.sign * b.sign, a.log_magnitude - b.log_magnitude};
}

inline SignedLogValue operator-(const SignedLogValue& a) { return a.negate(); }

inline SignedLogValue operator+(const SignedLogValue& a, const SignedLogValue& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.sign == b.sign) {
        const double hi = std::max(a.log_magnitude, b.log_magnitude);
        const double lo = std::min(a.log_magnitude, b.log_magnitude);
        return {a.sign, hi + std::log1p(std::exp(lo - hi))};
    }
    if (a.log_magnitude == b.log_magnitude) return SignedLogValue::zero();
    const SignedLogValue& big = a.log_magnitude > b.log_magnitude ? a : b;
    const double hi = std::max(a.log_magnitude, b.log_magnitude);
    const double lo = std::min(a.log_magnitude, b.log_magnitude);
    return {big.sign, hi + std::log1p(-std::exp(lo - hi))};
}

inline SignedLogValue operator-(const SignedLogValue& a, const SignedLogValue& b) {
    return a + b.negate();
}

// Streaming log-domain sum of signed terms. Positive and negative parts are
// accumulated separately with running-max rescaling, so any number of terms
// of any magnitude can be added in one pass.
class SignedLogSum {
  public:
    void add(int sign, double log_magnitude) {
        if (sign == 0) return;
        if (sign > 0)
            add_part(pos_max_, pos_scaled_, log_magnitude);
        else
            add_part(neg_max_, neg_scaled_, log_magnitude);
    }

    void add(const SignedLogValue& v) { add(v.sign, v.log_magnitude); }

    SignedLogValue total() const {
        return part_total(1, pos_max_, pos_scaled_) + part_total(-1, neg_max_, neg_scaled_);
    }

  private:
    static void add_part(double& mx, double& scaled, double lm) {
        if (scaled == 0.0) {
            mx = lm;
            scaled = 1.0;
        } else if (lm <= mx) {
            scaled += std::exp(lm - mx);
        } else {
            scaled = scaled * std::exp(mx - lm) + 1.0;
            mx = lm;
        }
    }

    static SignedLogValue part_total(int sign, double mx, double scaled) {
        if (scaled == 0.0) return SignedLogValue::zero();
        return SignedLogValue::from_log(sign, mx + std::log(scaled));
    }

    double pos_max_ = -std::numeric_limits<double>::infinity();
    double pos_scaled_ = 0.0;
    double neg_max_ = -std::numeric_limits<double>::infinity();
    double neg_scaled_ = 0.0;
};

}  // namespace xdldi
