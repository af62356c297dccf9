#pragma once
#include <utility>

#include "collage/formats.hpp"

namespace collage {

// Error-free transformations: each returns the rounded format result together
// with the value that makes the identity exact (x + y == a + b as reals, or
// x + e == a*b where the residual is representable).
namespace eft {

struct Pair {
    LpScalar hi;
    LpScalar lo;
};

// Ordered-operand checks: kChecked throws std::invalid_argument when the
// |a| >= |b| requirement is violated, kUnchecked computes unconditionally.
enum class OrderPolicy { kUnchecked, kChecked };

// Three-operation sum decomposition, requires |a| >= |b| for exactness.
Pair fast2sum(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b,
              OrderPolicy policy = OrderPolicy::kUnchecked);

// Seven-operation branch-free sum decomposition, no ordering required.
Pair two_sum(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b);

// Splits a into high/low halves whose exact sum is a; each half's significand
// fits in ceil(p/2) bits. Throws std::overflow_error when the (2^c + 1)
// scaling leaves the finite range.
Pair split(const FloatFormat& fmt, const LpScalar& a);

// Product decomposition via split (Dekker). Throws std::overflow_error on
// non-finite intermediates.
Pair two_prod(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b);

// Product decomposition using one fused multiply-add.
Pair two_prod_fma(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b);

}  // namespace eft
}  // namespace collage
