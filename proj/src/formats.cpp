#include "collage/formats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace collage {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_finite_of(int mant_bits, int e_max, bool full_top_mantissa) {
    // full_top_mantissa: all-ones mantissa is a value (IEEE formats). fp8e4m3
    // reserves it for NaN, so its top mantissa is all-ones minus one.
    double frac = 2.0 - std::ldexp(1.0, -mant_bits);
    if (!full_top_mantissa) frac -= std::ldexp(1.0, -mant_bits);
    return frac * std::ldexp(1.0, e_max);
}

// floor(log2|x|) for finite nonzero x, exact for subnormal doubles too.
int floor_log2(double x) {
    int e;
    std::frexp(std::fabs(x), &e);
    return e - 1;
}

}  // namespace

const FloatFormat kFp32{"fp32", 8, 23, -126, 127, true, true, max_finite_of(23, 127, true)};
const FloatFormat kFp16{"fp16", 5, 10, -14, 15, true, true, max_finite_of(10, 15, true)};
const FloatFormat kBf16{"bf16", 8, 7, -126, 127, true, true, max_finite_of(7, 127, true)};
const FloatFormat kFp8E4M3{"fp8e4m3", 4, 3, -6, 8, false, true, max_finite_of(3, 8, false)};
const FloatFormat kFp8E5M2{"fp8e5m2", 5, 2, -14, 15, true, true, max_finite_of(2, 15, true)};

const FloatFormat& format_by_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (const FloatFormat* f : {&kFp32, &kFp16, &kBf16, &kFp8E4M3, &kFp8E5M2}) {
        if (lower == f->name) return *f;
    }
    throw std::invalid_argument("unknown float format: " + std::string(name));
}

LpScalar round_to(const FloatFormat& fmt, double x, Overflow ovf) {
    if (std::isnan(x)) return LpScalar{kNaN, &fmt};
    const double sign = std::signbit(x) ? -1.0 : 1.0;
    if (std::isinf(x)) {
        if (!fmt.has_infinity)
            return LpScalar{ovf == Overflow::kSaturate ? sign * fmt.max_finite : kNaN, &fmt};
        return LpScalar{x, &fmt};
    }
    if (x == 0.0) return LpScalar{x, &fmt};  // keeps the zero sign

    const double ax = std::fabs(x);
    const int e = floor_log2(ax);
    if (e > fmt.e_max) {
        // Already at least 2^(e_max+1), past every rounding boundary.
        if (!fmt.has_infinity)
            return LpScalar{ovf == Overflow::kSaturate ? sign * fmt.max_finite : kNaN, &fmt};
        return LpScalar{sign * kInf, &fmt};
    }

    // Round onto the lattice of the operand's binade; ties-to-even comes from
    // the default FE_TONEAREST mode of nearbyint.
    const int q_exp = std::max(e, fmt.e_min) - fmt.mant_bits;
    const double q = std::ldexp(1.0, q_exp);
    const double n = std::nearbyint(ax / q);  // scaling by a power of two is exact
    const double r = std::ldexp(n, q_exp);

    if (r > fmt.max_finite) {
        if (!fmt.has_infinity)
            return LpScalar{ovf == Overflow::kSaturate ? sign * fmt.max_finite : kNaN, &fmt};
        return LpScalar{sign * kInf, &fmt};
    }
    return LpScalar{sign * r, &fmt};
}

bool is_canonical(const FloatFormat& fmt, double x) {
    if (std::isnan(x)) return true;
    if (std::isinf(x)) return fmt.has_infinity;
    const LpScalar r = round_to(fmt, x);
    return r.value == x && std::signbit(r.value) == std::signbit(x);
}

double ulp(const FloatFormat& fmt, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("ulp: non-finite input");
    const int e = (x == 0.0) ? fmt.e_min : std::max(floor_log2(x), fmt.e_min);
    return std::ldexp(1.0, e - fmt.mant_bits);
}

namespace {

void check_operands(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b) {
    if (a.format != &fmt || b.format != &fmt)
        throw std::invalid_argument("lp op: operands do not share the format");
}

}  // namespace

LpScalar lp_add(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b) {
    check_operands(fmt, a, b);
    return round_to(fmt, a.value + b.value);
}

LpScalar lp_sub(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b) {
    check_operands(fmt, a, b);
    return round_to(fmt, a.value - b.value);
}

LpScalar lp_mul(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b) {
    check_operands(fmt, a, b);
    return round_to(fmt, a.value * b.value);
}

LpScalar lp_div(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b) {
    check_operands(fmt, a, b);
    return round_to(fmt, a.value / b.value);
}

LpScalar lp_sqrt(const FloatFormat& fmt, const LpScalar& a) {
    if (a.format != &fmt) throw std::invalid_argument("lp op: operand format mismatch");
    return round_to(fmt, std::sqrt(a.value));
}

LpScalar lp_fma(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b, const LpScalar& c) {
    check_operands(fmt, a, b);
    if (c.format != &fmt) throw std::invalid_argument("lp op: operand format mismatch");
    return round_to(fmt, std::fma(a.value, b.value, c.value));
}

bool is_lost(const FloatFormat& fmt, const LpScalar& a, const LpScalar& b, LpOp op) {
    LpScalar f;
    switch (op) {
        case LpOp::kAdd: f = lp_add(fmt, a, b); break;
        case LpOp::kSub: f = lp_sub(fmt, a, b); break;
        case LpOp::kMul: f = lp_mul(fmt, a, b); break;
    }
    if (!std::isfinite(f.value) || !std::isfinite(a.value) || !std::isfinite(b.value))
        return false;
    return std::fabs(f.value - a.value) <= ulp(fmt, a.value) / 2 ||
           std::fabs(f.value - b.value) <= ulp(fmt, b.value) / 2;
}

uint32_t to_bits(const LpScalar& x) {
    const FloatFormat& fmt = *x.format;
    const uint32_t sign = std::signbit(x.value) ? 1u : 0u;
    const uint32_t exp_all_ones = (1u << fmt.exp_bits) - 1;
    const uint32_t mant_mask = (1u << fmt.mant_bits) - 1;

    if (std::isnan(x.value)) {
        // Canonical quiet NaN: top mantissa pattern for fp8e4m3, MSB-set
        // mantissa for IEEE-style formats, positive sign.
        const uint32_t mant = fmt.has_infinity ? (1u << (fmt.mant_bits - 1)) : mant_mask;
        return (exp_all_ones << fmt.mant_bits) | mant;
    }
    if (std::isinf(x.value)) return (sign << (fmt.exp_bits + fmt.mant_bits)) | (exp_all_ones << fmt.mant_bits);
    if (x.value == 0.0) return sign << (fmt.exp_bits + fmt.mant_bits);

    const double ax = std::fabs(x.value);
    const int e = floor_log2(ax);
    uint32_t biased, mant;
    if (e >= fmt.e_min) {
        biased = static_cast<uint32_t>(e + fmt.bias());
        mant = static_cast<uint32_t>(std::ldexp(ax, fmt.mant_bits - e)) & mant_mask;
    } else {
        biased = 0;
        mant = static_cast<uint32_t>(std::ldexp(ax, fmt.mant_bits - fmt.e_min));
    }
    return (sign << (fmt.exp_bits + fmt.mant_bits)) | (biased << fmt.mant_bits) | mant;
}

LpScalar from_bits(const FloatFormat& fmt, uint32_t bits) {
    const uint32_t total_mask = (1u << fmt.total_bits()) - 1;
    if (bits & ~total_mask) throw std::invalid_argument("from_bits: pattern wider than format");
    const uint32_t exp_all_ones = (1u << fmt.exp_bits) - 1;
    const uint32_t mant_mask = (1u << fmt.mant_bits) - 1;

    const uint32_t sign = bits >> (fmt.exp_bits + fmt.mant_bits);
    const uint32_t biased = (bits >> fmt.mant_bits) & exp_all_ones;
    const uint32_t mant = bits & mant_mask;
    const double s = sign ? -1.0 : 1.0;

    if (biased == exp_all_ones) {
        if (fmt.has_infinity) {
            if (mant == 0) return LpScalar{s * kInf, &fmt};
            return LpScalar{kNaN, &fmt};
        }
        if (mant == mant_mask) return LpScalar{kNaN, &fmt};
        // fp8e4m3: remaining all-ones-exponent patterns are ordinary normals.
    }
    if (biased == 0) {
        const double v = std::ldexp(static_cast<double>(mant), fmt.e_min - fmt.mant_bits);
        return LpScalar{s * v, &fmt};
    }
    const int e = static_cast<int>(biased) - fmt.bias();
    const double frac = 1.0 + std::ldexp(static_cast<double>(mant), -fmt.mant_bits);
    return LpScalar{s * std::ldexp(frac, e), &fmt};
}

std::vector<LpScalar> enumerate_finite(const FloatFormat& fmt) {
    if (fmt.total_bits() > 16)
        throw std::invalid_argument("enumerate_finite: format wider than 16 bits");
    std::vector<LpScalar> out;
    out.reserve(1u << fmt.total_bits());
    for (uint32_t b = 0; b < (1u << fmt.total_bits()); ++b) {
        LpScalar v = from_bits(fmt, b);
        if (std::isfinite(v.value)) out.push_back(v);
    }
    std::sort(out.begin(), out.end(), [](const LpScalar& a, const LpScalar& b) {
        if (a.value != b.value) return a.value < b.value;
        return std::signbit(a.value) && !std::signbit(b.value);  // -0 before +0
    });
    return out;
}

LpScalar stochastic_round(const FloatFormat& fmt, double x, Rng& rng) {
    if (!std::isfinite(x)) throw std::domain_error("stochastic_round: non-finite input");
    if (std::fabs(x) > fmt.max_finite)
        throw std::domain_error("stochastic_round: input outside format range");
    if (x == 0.0) return LpScalar{x, &fmt};

    const int e = std::max(floor_log2(x), fmt.e_min);
    const int q_exp = e - fmt.mant_bits;
    const double q = std::ldexp(1.0, q_exp);
    const double n = std::floor(x / q);  // exact scaling, works for both signs
    const double lower = std::ldexp(n, q_exp);
    if (lower == x) return LpScalar{x, &fmt};

    const double p_up = (x - lower) / q;
    const double upper = std::ldexp(n + 1.0, q_exp);
    return LpScalar{rng.uniform01() < p_up ? upper : lower, &fmt};
}

LpTensor LpTensor::from_wide(const FloatFormat& fmt, const std::vector<double>& wide) {
    LpTensor t(fmt, wide.size());
    for (size_t i = 0; i < wide.size(); ++i) t.set_rounded(i, wide[i]);
    return t;
}

}  // namespace collage
