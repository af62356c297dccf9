#pragma once
#include "collage/eft.hpp"
#include "collage/formats.hpp"

namespace collage {

// Length-2 multi-component value: hi carries the leading approximation, lo the
// non-overlapping residual, so hi + lo is the represented real exactly.
struct Expansion2 {
    LpScalar hi;
    LpScalar lo;
};

// Non-overlap check, stated operationally: the pair is a fast2sum fixed point.
bool is_normalized(const FloatFormat& fmt, const Expansion2& x);

// Adds a float to an expansion (two fast2sum stages, inner addition rounded
// once). Requires |x.hi| >= |a| under OrderPolicy::kChecked.
Expansion2 grow(const FloatFormat& fmt, const Expansion2& x, const LpScalar& a,
                eft::OrderPolicy policy = eft::OrderPolicy::kUnchecked);

// grow with the first stage replaced by two_sum, valid for any magnitudes
// (needed when the expansion starts at zero).
Expansion2 safe_grow(const FloatFormat& fmt, const Expansion2& x, const LpScalar& a);

// Expansion times float.
Expansion2 scaling(const FloatFormat& fmt, const Expansion2& x, const LpScalar& v);

// Expansion times expansion; the lo*lo cross term is dropped by construction.
Expansion2 mul(const FloatFormat& fmt, const Expansion2& a, const Expansion2& b);

// Two-rounding decomposition of a wide real: hi = RN(x), lo = RN(x - hi).
Expansion2 expand(const FloatFormat& fmt, double x);

// Exact wide-precision value hi + lo.
double eval_wide(const Expansion2& x);

// Per-element expansion pair of flat tensors sharing shape and format.
struct ExpansionTensor {
    LpTensor hi;
    LpTensor lo;

    ExpansionTensor() = default;
    ExpansionTensor(const FloatFormat& fmt, size_t n) : hi(fmt, n), lo(fmt, n) {}
    size_t size() const { return hi.size(); }
    Expansion2 element(size_t i) const { return Expansion2{hi.scalar(i), lo.scalar(i)}; }
    void set(size_t i, const Expansion2& e) {
        hi.set(i, e.hi);
        lo.set(i, e.lo);
    }
    double eval_wide(size_t i) const { return hi[i] + lo[i]; }
};

}  // namespace collage
