#include "collage/eft.hpp"

#include <cmath>
#include <stdexcept>

namespace collage::eft {

Pair fast2sum(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b, OrderPolicy policy) {
    if (policy == OrderPolicy::kChecked && std::fabs(a.value) < std::fabs(b.value))
        throw std::invalid_argument("fast2sum: |a| < |b|");
    const LpScalar x = lp_add(fmt, a, b);
    const LpScalar y = lp_sub(fmt, b, lp_sub(fmt, x, a));
    return {x, y};
}

Pair two_sum(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b) {
    const LpScalar x = lp_add(fmt, a, b);
    const LpScalar b_virtual = lp_sub(fmt, x, a);
    const LpScalar a_virtual = lp_sub(fmt, x, b_virtual);
    const LpScalar b_roundoff = lp_sub(fmt, b, b_virtual);
    const LpScalar a_roundoff = lp_sub(fmt, a, a_virtual);
    const LpScalar y = lp_add(fmt, a_roundoff, b_roundoff);
    return {x, y};
}

Pair split(const FloatFormat& fmt, const LpScalar& a) {
    // c = ceil(p/2) of the significand width p = mant_bits + 1. For even p
    // this is the bisection point; for odd p (fp16, fp8e5m2) the high part
    // must get the shorter half or the partial products stop being exact.
    const int c = (fmt.mant_bits + 2) / 2;
    const LpScalar factor = round_to(fmt, std::ldexp(1.0, c) + 1.0);
    const LpScalar t = lp_mul(fmt, factor, a);
    if (!std::isfinite(t.value)) throw std::overflow_error("split: scaling overflow");
    const LpScalar hi = lp_sub(fmt, t, lp_sub(fmt, t, a));
    const LpScalar lo = lp_sub(fmt, a, hi);
    return {hi, lo};
}

Pair two_prod(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b) {
    const LpScalar x = lp_mul(fmt, a, b);
    if (!std::isfinite(x.value)) throw std::overflow_error("two_prod: product overflow");
    const auto [a_hi, a_lo] = split(fmt, a);
    const auto [b_hi, b_lo] = split(fmt, b);
    const LpScalar err1 = lp_sub(fmt, x, lp_mul(fmt, a_hi, b_hi));
    const LpScalar err2 = lp_sub(fmt, err1, lp_mul(fmt, a_lo, b_hi));
    const LpScalar err3 = lp_sub(fmt, err2, lp_mul(fmt, a_hi, b_lo));
    const LpScalar e = lp_sub(fmt, lp_mul(fmt, a_lo, b_lo), err3);
    if (!std::isfinite(e.value)) throw std::overflow_error("two_prod: intermediate overflow");
    return {x, e};
}

Pair two_prod_fma(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b) {
    const LpScalar x = lp_mul(fmt, a, b);
    const LpScalar neg_x{-x.value, &fmt};
    const LpScalar e = lp_fma(fmt, a, b, neg_x);
    return {x, e};
}

}  // namespace collage::eft
