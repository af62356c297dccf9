#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "collage/dyadic.hpp"
#include "collage/formats.hpp"
#include "collage/rng.hpp"

using namespace collage;

namespace {

LpScalar mk(const FloatFormat& f, double v) { return round_to(f, v); }

// Independent rounding oracle: scan the sorted finite census for the two
// neighbours of x and pick by distance, ties by even integer significand.
double round_oracle_small(const FloatFormat& f, const std::vector<LpScalar>& census, double x) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    double best = 0.0;
    double best_dist = std::numeric_limits<double>::infinity();
    bool tie = false;
    double tie_other = 0.0;
    for (const auto& c : census) {
        const double d = std::fabs(x - c.value);
        if (d < best_dist) {
            best = c.value;
            best_dist = d;
            tie = false;
        } else if (d == best_dist && c.value != best) {
            tie = true;
            tie_other = c.value;
        }
    }
    const double max_f = f.max_finite;
    if (std::fabs(x) > max_f && best_dist > ulp(f, max_f) / 2)
        return f.has_infinity ? std::copysign(std::numeric_limits<double>::infinity(), x)
                              : std::numeric_limits<double>::quiet_NaN();
    if (std::fabs(x) == max_f + ulp(f, max_f) / 2 && f.has_infinity) {
        // Boundary tie against the virtual next binade value, which has an
        // even significand, so IEEE rounding escalates to infinity.
        return std::copysign(std::numeric_limits<double>::infinity(), x);
    }
    if (!tie) return best;
    const double scale = ulp(f, best == 0.0 ? tie_other : best);
    const auto parity = [&](double v) {
        return static_cast<long long>(std::fabs(v) / scale) % 2;
    };
    return parity(best) == 0 ? best : tie_other;
}

}  // namespace

TEST_CASE("built-in format table") {
    CHECK(kFp32.exp_bits == 8);
    CHECK(kFp32.mant_bits == 23);
    CHECK(kFp16.exp_bits == 5);
    CHECK(kFp16.mant_bits == 10);
    CHECK(kBf16.exp_bits == 8);
    CHECK(kBf16.mant_bits == 7);
    CHECK(kFp8E4M3.exp_bits == 4);
    CHECK(kFp8E4M3.mant_bits == 3);
    CHECK(kFp8E5M2.exp_bits == 5);
    CHECK(kFp8E5M2.mant_bits == 2);

    CHECK(ulp(kFp32, 1.0) == 0x1.0p-23);
    CHECK(ulp(kFp16, 1.0) == 0x1.0p-10);
    CHECK(ulp(kBf16, 1.0) == 0x1.0p-7);
    CHECK(ulp(kFp8E4M3, 1.0) == 0x1.0p-3);
    CHECK(ulp(kFp8E5M2, 1.0) == 0x1.0p-2);

    CHECK(kFp8E4M3.max_finite == 448.0);
    CHECK(kFp8E5M2.max_finite == 57344.0);
    CHECK(kFp16.max_finite == 65504.0);

    CHECK(&format_by_name("BF16") == &kBf16);
    CHECK(&format_by_name("fp8E4m3") == &kFp8E4M3);
    CHECK_THROWS_AS(format_by_name("fp64"), std::invalid_argument);
}

TEST_CASE("round_to basics") {
    CHECK(round_to(kBf16, 0.999).value == 1.0);
    CHECK(round_to(kBf16, 0.1).value == 0.10009765625);
    CHECK(round_to(kBf16, 1.0).value == 1.0);

    // ties-to-even both directions
    CHECK(round_to(kBf16, 1.0 + 0x1.0p-8).value == 1.0);
    CHECK(round_to(kBf16, 1.0 + 3 * 0x1.0p-8).value == 1.0 + 2 * 0x1.0p-7);

    // signed zero and tiny magnitudes
    CHECK(std::signbit(round_to(kBf16, -0.0).value));
    CHECK(round_to(kBf16, 0x1.0p-140).value == 0.0);
    CHECK(std::signbit(round_to(kBf16, -0x1.0p-140).value));

    // subnormal lattice
    CHECK(round_to(kBf16, 0x1.0p-133).value == 0x1.0p-133);
    CHECK(round_to(kBf16, 0x1.8p-134).value == 0x1.0p-133);  // 0.75*min_sub -> min_sub

    // overflow
    CHECK(std::isinf(round_to(kBf16, 1e40).value));
    CHECK(std::isinf(round_to(kBf16, -1e40).value));
    CHECK(std::isnan(round_to(kBf16, std::numeric_limits<double>::quiet_NaN()).value));

    // fp8e4m3 overflow convention: NaN by default, 448 under saturation
    CHECK(std::isnan(round_to(kFp8E4M3, 1000.0).value));
    CHECK(round_to(kFp8E4M3, 1000.0, Overflow::kSaturate).value == 448.0);
    CHECK(round_to(kFp8E4M3, 464.0).value == 448.0);  // tie toward the even significand
    CHECK(std::isnan(round_to(kFp8E4M3, 465.0).value));
    CHECK(std::isnan(round_to(kFp8E4M3, std::numeric_limits<double>::infinity()).value));
}

TEST_CASE("ulp values") {
    CHECK(ulp(kBf16, 200.0) == 1.0);
    CHECK(ulp(kBf16, 1.0) == 0x1.0p-7);
    CHECK(ulp(kFp32, 1.0) == 0x1.0p-23);
    CHECK(ulp(kBf16, 0.0) == 0x1.0p-133);  // subnormal spacing
    CHECK(ulp(kBf16, -200.0) == 1.0);
    CHECK_THROWS_AS(ulp(kBf16, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("lp arithmetic") {
    const auto a = mk(kBf16, 200.0);
    const auto b = mk(kBf16, 0.1);
    CHECK(lp_add(kBf16, a, b).value == 200.0);
    CHECK(lp_mul(kBf16, mk(kBf16, 1.0), b).value == b.value);
    CHECK(lp_add(kBf16, mk(kBf16, 1.0078125), mk(kBf16, 1.0078125)).value == 2.015625);

    CHECK(lp_fma(kBf16, mk(kBf16, 1.0078125), mk(kBf16, 1.0078125), mk(kBf16, -1.015625)).value ==
          0x1.0p-14);
    CHECK(lp_fma(kBf16, mk(kBf16, 0.0), b, a).value == a.value);

    // division / sqrt special values
    CHECK(std::isinf(lp_div(kBf16, mk(kBf16, 1.0), mk(kBf16, 0.0)).value));
    CHECK(lp_div(kBf16, mk(kBf16, -1.0), mk(kBf16, 0.0)).value ==
          -std::numeric_limits<double>::infinity());
    CHECK(std::isnan(lp_div(kBf16, mk(kBf16, 0.0), mk(kBf16, 0.0)).value));
    CHECK(std::isnan(lp_sqrt(kBf16, mk(kBf16, -1.0)).value));
    CHECK(lp_sqrt(kBf16, mk(kBf16, 4.0)).value == 2.0);

    LpScalar wrong{1.0, &kFp16};
    CHECK_THROWS_AS(lp_add(kBf16, a, wrong), std::invalid_argument);
}

TEST_CASE("is_lost") {
    CHECK(is_lost(kBf16, mk(kBf16, 200.0), mk(kBf16, 0.1), LpOp::kAdd));
    CHECK_FALSE(is_lost(kBf16, mk(kBf16, 1.0), mk(kBf16, 1.0), LpOp::kAdd));
    CHECK(is_lost(kBf16, mk(kBf16, 1.0), mk(kBf16, 0x1.0p-9), LpOp::kAdd));
}

TEST_CASE("bits round trip") {
    CHECK(to_bits(mk(kBf16, 1.0)) == 0x3F80);
    CHECK(from_bits(kBf16, 0x0000).value == 0.0);
    CHECK_FALSE(std::signbit(from_bits(kBf16, 0x0000).value));
    CHECK(std::signbit(from_bits(kBf16, 0x8000).value));

    // every non-NaN pattern survives the round trip; NaNs canonicalize
    int nan_patterns = 0;
    for (uint32_t b = 0; b < 0x10000; ++b) {
        const LpScalar v = from_bits(kBf16, b);
        if (std::isnan(v.value)) {
            ++nan_patterns;
            CHECK(to_bits(v) == 0x7FC0);
        } else {
            CHECK(to_bits(v) == b);
        }
    }
    CHECK(nan_patterns == 254);

    for (uint32_t b = 0; b < 0x100; ++b) {
        const LpScalar v = from_bits(kFp8E4M3, b);
        if (std::isnan(v.value))
            CHECK(to_bits(v) == 0x7F);
        else
            CHECK(to_bits(v) == b);
    }
    CHECK_THROWS_AS(from_bits(kBf16, 0x10000), std::invalid_argument);
}

TEST_CASE("enumerate_finite") {
    const auto e4m3 = enumerate_finite(kFp8E4M3);
    CHECK(e4m3.size() == 254);  // 256 patterns minus two NaNs
    const auto e5m2 = enumerate_finite(kFp8E5M2);
    CHECK(e5m2.size() == 248);  // minus 2 infinities and 6 NaNs

    int zeros = 0;
    for (const auto& v : e4m3) {
        CHECK(round_to(kFp8E4M3, v.value).value == v.value);
        if (v.value == 0.0) ++zeros;
    }
    CHECK(zeros == 2);
    CHECK(e4m3.front().value == -448.0);
    CHECK(e4m3.back().value == 448.0);
    for (size_t i = 1; i < e4m3.size(); ++i) CHECK(e4m3[i - 1].value <= e4m3[i].value);

    CHECK_THROWS_AS(enumerate_finite(kFp32), std::invalid_argument);
}

TEST_CASE("rounding idempotence exhaustive for 16-bit formats") {
    for (const FloatFormat* f : {&kBf16, &kFp16, &kFp8E4M3, &kFp8E5M2}) {
        for (const auto& v : enumerate_finite(*f)) {
            const LpScalar r = round_to(*f, v.value);
            CHECK(r.value == v.value);
            CHECK(std::signbit(r.value) == std::signbit(v.value));
        }
    }
}

TEST_CASE("round_to against neighbour-scan oracle") {
    Rng rng(20240811);
    for (const FloatFormat* f : {&kBf16, &kFp8E4M3, &kFp8E5M2}) {
        const auto census = enumerate_finite(*f);
        int checked = 0;
        for (int i = 0; i < 200000; ++i) {
            // wide reals spread over the format's exponent range, plus overflow
            // and subnormal territory
            const int e = static_cast<int>(rng.next_below(
                              static_cast<uint64_t>(f->e_max - (f->e_min - f->mant_bits) + 6))) +
                          (f->e_min - f->mant_bits) - 3;
            double x = std::ldexp(1.0 + rng.uniform01(), e);
            if (rng.next_u64() & 1) x = -x;
            const double want = round_oracle_small(*f, census, x);
            const double got = round_to(*f, x).value;
            if (std::isnan(want)) {
                CHECK(std::isnan(got));
            } else {
                CHECK(got == want);
            }
            ++checked;
        }
        CHECK(checked == 200000);
    }

    // fp32 path cross-checked against native float hardware rounding
    for (int i = 0; i < 500000; ++i) {
        const int e = static_cast<int>(rng.next_below(280)) - 152;
        double x = std::ldexp(1.0 + rng.uniform01(), e);
        if (rng.next_u64() & 1) x = -x;
        const double want = static_cast<double>(static_cast<float>(x));
        CHECK(round_to(kFp32, x).value == want);
    }
}

TEST_CASE("rounding monotonicity") {
    Rng rng(7);
    for (int i = 0; i < 200000; ++i) {
        const int e = static_cast<int>(rng.next_below(40)) - 20;
        double x = std::ldexp(rng.uniform01() * 2 - 1, e);
        double y = std::ldexp(rng.uniform01() * 2 - 1, e);
        if (x > y) std::swap(x, y);
        CHECK(round_to(kBf16, x).value <= round_to(kBf16, y).value);
    }
}

TEST_CASE("lp_add/lp_mul exactness census vs dyadic oracle") {
    Rng rng(99);
    const auto census = enumerate_finite(kBf16);
    uint64_t tested = 0;
    for (int i = 0; i < 1000000; ++i) {
        const auto& a = census[rng.next_below(census.size())];
        const auto& b = census[rng.next_below(census.size())];
        const Dyadic da = Dyadic::from_double(a.value);
        const Dyadic db = Dyadic::from_double(b.value);

        double want;
        if ((da + db).round_to_format(kBf16, want)) {
            CHECK(lp_add(kBf16, a, b).value == want);
        } else {
            CHECK(std::isinf(lp_add(kBf16, a, b).value));
        }
        if ((da * db).round_to_format(kBf16, want)) {
            CHECK(lp_mul(kBf16, a, b).value == want);
        } else {
            CHECK(std::isinf(lp_mul(kBf16, a, b).value));
        }
        ++tested;
    }
    CHECK(tested == 1000000);
}

TEST_CASE("stochastic rounding") {
    Rng rng(42);
    CHECK(stochastic_round(kBf16, 1.0, rng).value == 1.0);

    // exact values must not consume randomness
    Rng r1(5), r2(5);
    (void)stochastic_round(kBf16, 0.5, r1);
    CHECK(r1.next_u64() == r2.next_u64());

    const double x = 1.0 + 0x1.0p-9;
    uint64_t ups = 0;
    const int n = 1000000;
    double sum = 0.0;
    Rng r(20240811);
    for (int i = 0; i < n; ++i) {
        const double v = stochastic_round(kBf16, x, r).value;
        sum += v;
        if (v > 1.0) ++ups;
    }
    // mean within 3 standard errors of x; P(up) = 2^-9 / 2^-7 = 0.25
    const double p = 0.25;
    const double se = std::sqrt(p * (1 - p)) * 0x1.0p-7 / std::sqrt(double(n));
    CHECK(std::fabs(sum / n - x) <= 3 * se);
    const double p_se = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(double(ups) / n - p) <= 4 * p_se);

    CHECK_THROWS_AS(stochastic_round(kBf16, 1e40, rng), std::domain_error);
    CHECK_THROWS_AS(stochastic_round(kBf16, std::numeric_limits<double>::infinity(), rng),
                    std::domain_error);
}
