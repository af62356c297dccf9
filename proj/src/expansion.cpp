#include "collage/expansion.hpp"

#include <cmath>
#include <stdexcept>

namespace collage {

bool is_normalized(const FloatFormat& fmt, const Expansion2& x) {
    const auto [h, l] = eft::fast2sum(fmt, x.hi, x.lo);
    return h.value == x.hi.value && l.value == x.lo.value;
}

Expansion2 grow(const FloatFormat& fmt, const Expansion2& x, const LpScalar& a,
                eft::OrderPolicy policy) {
    auto [u, v] = eft::fast2sum(fmt, x.hi, a, policy);
    const LpScalar w = lp_add(fmt, x.lo, v);
    auto [u2, v2] = eft::fast2sum(fmt, u, w);
    return {u2, v2};
}

Expansion2 safe_grow(const FloatFormat& fmt, const Expansion2& x, const LpScalar& a) {
    auto [u, v] = eft::two_sum(fmt, x.hi, a);
    const LpScalar w = lp_add(fmt, x.lo, v);
    auto [u2, v2] = eft::fast2sum(fmt, u, w);
    return {u2, v2};
}

Expansion2 scaling(const FloatFormat& fmt, const Expansion2& x, const LpScalar& v) {
    auto [p, e] = eft::two_prod_fma(fmt, x.hi, v);
    if (!std::isfinite(p.value)) throw std::overflow_error("scaling: hi*v overflow");
    const LpScalar e2 = lp_add(fmt, lp_mul(fmt, x.lo, v), e);
    auto [h, l] = eft::fast2sum(fmt, p, e2);
    return {h, l};
}

Expansion2 mul(const FloatFormat& fmt, const Expansion2& a, const Expansion2& b) {
    auto [x, e] = eft::two_prod_fma(fmt, a.hi, b.hi);
    if (!std::isfinite(x.value)) throw std::overflow_error("mul: hi*hi overflow");
    const LpScalar cross =
        lp_add(fmt, lp_mul(fmt, a.hi, b.lo), lp_mul(fmt, a.lo, b.hi));
    const LpScalar e2 = lp_add(fmt, e, cross);
    auto [h, l] = eft::fast2sum(fmt, x, e2);
    return {h, l};
}

Expansion2 expand(const FloatFormat& fmt, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("expand: non-finite input");
    const LpScalar hi = round_to(fmt, x);
    if (!std::isfinite(hi.value)) throw std::domain_error("expand: value outside format range");
    const LpScalar lo = round_to(fmt, x - hi.value);
    // The rounded residual can land exactly on ulp(hi)/2 against an odd
    // significand; one error-free renormalization makes every expansion a
    // fast2sum fixed point without changing its value.
    auto [h, l] = eft::fast2sum(fmt, hi, lo);
    return {h, l};
}

double eval_wide(const Expansion2& x) { return x.hi.value + x.lo.value; }

}  // namespace collage
