#pragma once
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "collage/rng.hpp"

namespace collage {

// Descriptor of an emulated low-precision binary floating-point format.
//
// Values of every format are held as binary64 doubles that are canonical for
// the format (round_to(fmt, v) == v). Arithmetic is performed in binary64 and
// rounded once; binary64 carries at least 2*(mant_bits+1)+2 significand bits
// for every built-in format, so the double rounding is innocuous and results
// are correctly rounded.
struct FloatFormat {
    std::string_view name;
    int exp_bits;
    int mant_bits;  // stored mantissa bits, excluding the hidden bit
    int e_min;      // minimum normal exponent
    int e_max;      // maximum normal exponent
    bool has_infinity;        // fp8e4m3 has no infinities
    bool supports_subnormals; // true for all built-ins
    double max_finite;

    int total_bits() const { return 1 + exp_bits + mant_bits; }
    int bias() const { return (1 << (exp_bits - 1)) - 1; }
    int storage_bytes() const { return (total_bits() + 7) / 8; }
};

// Built-in formats. fp8e4m3 follows the convention with a single NaN mantissa
// pattern per sign (exp=1111, mant=111), no infinities, and max finite 448;
// overflow yields NaN unless saturation is requested explicitly.
extern const FloatFormat kFp32;
extern const FloatFormat kFp16;
extern const FloatFormat kBf16;
extern const FloatFormat kFp8E4M3;
extern const FloatFormat kFp8E5M2;

// Case-insensitive lookup of "fp32", "fp16", "bf16", "fp8e4m3", "fp8e5m2".
// Throws std::invalid_argument for unknown names.
const FloatFormat& format_by_name(std::string_view name);

// A value guaranteed exactly representable in `format` (incl. +-0, +-Inf on
// formats that have them, subnormals, and one canonical NaN).
struct LpScalar {
    double value = 0.0;
    const FloatFormat* format = nullptr;
};

enum class Overflow { kDefault, kSaturate };

// Round-to-nearest, ties-to-even. Overflow maps to +-Inf (fp8e4m3: NaN, or
// +-max_finite with Overflow::kSaturate); magnitudes below half the smallest
// subnormal round to signed zero; NaN propagates as the canonical NaN.
LpScalar round_to(const FloatFormat& fmt, double x, Overflow ovf = Overflow::kDefault);

bool is_canonical(const FloatFormat& fmt, double x);

// Spacing of representable values at the magnitude of x:
// 2^(max(e, e_min) - mant_bits) with 2^e <= |x| < 2^(e+1); ulp(0) is the
// subnormal spacing. Rejects Inf/NaN.
double ulp(const FloatFormat& fmt, double x);
inline double ulp(const FloatFormat& fmt, const LpScalar& x) { return ulp(fmt, x.value); }

// Correctly rounded format arithmetic. Operands must be canonical in fmt and
// share it; division by zero gives signed Inf, 0/0 and sqrt of negatives NaN.
LpScalar lp_add(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b);
LpScalar lp_sub(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b);
LpScalar lp_mul(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b);
LpScalar lp_div(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b);
LpScalar lp_sqrt(const FloatFormat& fmt, const LpScalar& a);
// Single rounding of the exact a*b + c.
LpScalar lp_fma(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b, const LpScalar& c);

enum class LpOp { kAdd, kSub, kMul };

// True when the rounded result absorbs one operand: |F(a op b) - a| <= ulp(a)/2
// or |F(a op b) - b| <= ulp(b)/2, evaluated in binary64.
bool is_lost(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b, LpOp op);

// Bit-level view with the usual sign/exponent/mantissa layout. NaNs map to the
// format's canonical quiet-NaN pattern, so from_bits(to_bits(x)) == x for
// every canonical value and to_bits(from_bits(b)) == b for every non-NaN b.
uint32_t to_bits(const LpScalar& x);
LpScalar from_bits(const FloatFormat& fmt, uint32_t bits);

// Every finite canonical value exactly once, ascending (-0 precedes +0).
// Only for formats of at most 16 bits.
std::vector<LpScalar> enumerate_finite(const FloatFormat& fmt);

// Rounds x to its lower lattice neighbour a_l with probability
// (a_u - x)/(a_u - a_l), else to a_u; exactly representable x is returned
// unchanged without consuming randomness. |x| beyond max_finite is an error.
LpScalar stochastic_round(const FloatFormat& fmt, double x, Rng& rng);

// Flat vector of canonical values sharing one format.
class LpTensor {
public:
    LpTensor() = default;
    LpTensor(const FloatFormat& fmt, size_t n) : fmt_(&fmt), data_(n, 0.0) {}

    static LpTensor from_wide(const FloatFormat& fmt, const std::vector<double>& wide);

    const FloatFormat& format() const { return *fmt_; }
    size_t size() const { return data_.size(); }

    double operator[](size_t i) const { return data_[i]; }
    LpScalar scalar(size_t i) const { return LpScalar{data_[i], fmt_}; }
    void set(size_t i, const LpScalar& v) { data_[i] = v.value; }
    void set_rounded(size_t i, double wide) { data_[i] = round_to(*fmt_, wide).value; }

    const std::vector<double>& values() const { return data_; }

private:
    const FloatFormat* fmt_ = nullptr;
    std::vector<double> data_;
};

}  // namespace collage
