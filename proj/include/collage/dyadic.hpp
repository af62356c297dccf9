#pragma once
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>

#include "collage/formats.hpp"

namespace collage {

// Exact dyadic-rational arithmetic (num * 2^exp) used as the independent
// oracle for the verification censuses. 768 bits cover any aligned sum or
// product of values from the built-in formats (worst case ~450 bits), and the
// checked backend throws rather than truncating if that bound is ever wrong.
// Arithmetic here never touches the emulated rounding path it is used to check.
class Dyadic {
public:
    using Int = boost::multiprecision::number<
        boost::multiprecision::cpp_int_backend<768, 768, boost::multiprecision::signed_magnitude,
                                               boost::multiprecision::checked, void>>;

    Dyadic() = default;
    Dyadic(Int num, int exp) : num_(std::move(num)), exp_(exp) { normalize(); }

    static Dyadic from_double(double x) {
        if (!std::isfinite(x)) throw std::invalid_argument("Dyadic: non-finite input");
        if (x == 0.0) return Dyadic();
        int e;
        const double m = std::frexp(x, &e);
        const auto num = static_cast<long long>(std::ldexp(m, 53));  // exact: |m|*2^53 is integral
        return Dyadic(Int(num), e - 53);
    }

    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const int e = std::min(a.exp_, b.exp_);
        // scale via multiplication: shifting negative cpp_ints is not defined
        const Int sa = a.num_ * (Int(1) << (a.exp_ - e));
        const Int sb = b.num_ * (Int(1) << (b.exp_ - e));
        return Dyadic(sa + sb, e);
    }

    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + b.negated(); }
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
        return Dyadic(a.num_ * b.num_, a.exp_ + b.exp_);
    }

    Dyadic negated() const {
        Dyadic r = *this;
        r.num_ = -r.num_;
        return r;
    }

    friend bool operator==(const Dyadic& a, const Dyadic& b) {
        return a.num_ == b.num_ && (a.num_ == 0 || a.exp_ == b.exp_);
    }

    bool less_abs(const Dyadic& other) const {
        const Int an = boost::multiprecision::abs(num_);
        const Int bn = boost::multiprecision::abs(other.num_);
        if (an == 0) return bn != 0;
        if (bn == 0) return false;
        const int e = std::min(exp_, other.exp_);
        return (an << (exp_ - e)) < (bn << (other.exp_ - e));
    }

    // floor(log2|x|); undefined for zero.
    int floor_log2() const {
        return static_cast<int>(boost::multiprecision::msb(boost::multiprecision::abs(num_))) +
               exp_;
    }

    // True when this value is exactly representable in fmt (finite lattice,
    // within max magnitude).
    bool representable_in(const FloatFormat& fmt) const {
        if (is_zero()) return true;
        if (exp_ < fmt.e_min - fmt.mant_bits) return false;  // below the lattice quantum
        const int bits = static_cast<int>(
                             boost::multiprecision::msb(boost::multiprecision::abs(num_))) +
                         1;
        if (bits > fmt.mant_bits + 1) return false;
        if (floor_log2() > fmt.e_max) return false;
        return !from_double(fmt.max_finite).less_abs(*this);
    }

    // Round-to-nearest ties-to-even onto fmt's lattice. Returns false when the
    // rounded magnitude exceeds max_finite (overflow), leaving out untouched.
    bool round_to_format(const FloatFormat& fmt, double& out) const {
        if (is_zero()) {
            out = 0.0;
            return true;
        }
        const int e = std::max(floor_log2(), fmt.e_min);
        const int q_exp = e - fmt.mant_bits;
        Int mag = boost::multiprecision::abs(num_);
        Int quot;
        if (exp_ >= q_exp) {
            quot = mag << (exp_ - q_exp);
        } else {
            const int shift = q_exp - exp_;
            quot = mag >> shift;
            const Int rem = mag - (quot << shift);
            const Int half = Int(1) << (shift - 1);
            if (rem > half || (rem == half && boost::multiprecision::bit_test(quot, 0)))
                ++quot;
        }
        double v = std::ldexp(quot.convert_to<double>(), q_exp);  // quot <= 2^(mant+1): exact
        if (v > fmt.max_finite) return false;
        out = sign() < 0 ? -v : v;
        return true;
    }

private:
    void normalize() {
        if (num_ == 0) {
            exp_ = 0;
            return;
        }
        Int mag = boost::multiprecision::abs(num_);
        const unsigned tz = boost::multiprecision::lsb(mag);
        if (tz > 0) {
            mag >>= tz;
            num_ = num_ < 0 ? Int(-mag) : mag;
            exp_ += static_cast<int>(tz);
        }
    }

    Int num_ = 0;
    int exp_ = 0;
};

}  // namespace collage
