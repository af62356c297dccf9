#include "collage/verify.hpp"

#include <cmath>
#include <cstdio>

#include "collage/dyadic.hpp"
#include "collage/expansion.hpp"
#include "collage/optim.hpp"
#include "collage/rng.hpp"

namespace collage::verify {

namespace {

eft::Pair default_two_sum(const FloatFormat& f, const LpScalar& a, const LpScalar& b) {
    return eft::two_sum(f, a, b);
}

eft::Pair default_two_prod_fma(const FloatFormat& f, const LpScalar& a, const LpScalar& b) {
    return eft::two_prod_fma(f, a, b);
}

// Visits every pair (exhaustive) or `samples` seeded pairs.
template <typename Visitor>
void for_pairs(const FloatFormat& fmt, uint64_t samples, uint64_t seed, Visitor&& visit) {
    if (samples == 0 || fmt.total_bits() <= 16) {
        const auto census = enumerate_finite(fmt);
        if (samples == 0) {
            for (const auto& a : census)
                for (const auto& b : census) visit(a, b);
        } else {
            Rng rng(seed);
            for (uint64_t i = 0; i < samples; ++i) {
                const auto& a = census[rng.next_below(census.size())];
                const auto& b = census[rng.next_below(census.size())];
                visit(a, b);
            }
        }
        return;
    }
    // wide formats: draw canonical values across the full exponent range,
    // subnormals included
    Rng rng(seed);
    const int lo_e = fmt.e_min - fmt.mant_bits;
    const auto draw = [&] {
        const int e = lo_e + static_cast<int>(rng.next_below(uint64_t(fmt.e_max - lo_e + 1)));
        double x = std::ldexp(1.0 + rng.uniform01(), e);
        if (rng.next_u64() & 1) x = -x;
        return round_to(fmt, x);
    };
    for (uint64_t i = 0; i < samples; ++i) {
        const LpScalar a = draw();
        const LpScalar b = draw();
        visit(a, b);
    }
}

std::string census_detail(const CensusResult& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "tested=%llu failures=%llu skipped_nonfinite=%llu skipped_unrepresentable=%llu",
                  (unsigned long long)r.tested, (unsigned long long)r.failures,
                  (unsigned long long)r.skipped_nonfinite,
                  (unsigned long long)r.skipped_unrepresentable);
    return buf;
}

std::string render4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

CensusResult sum_eft_census(const FloatFormat& fmt, uint64_t sample_pairs, uint64_t seed,
                            SumFn fn) {
    if (!fn) fn = default_two_sum;
    CensusResult r;
    for_pairs(fmt, sample_pairs, seed, [&](const LpScalar& a, const LpScalar& b) {
        const eft::Pair p = fn(fmt, a, b);
        if (!std::isfinite(p.hi.value) || !std::isfinite(p.lo.value)) {
            ++r.skipped_nonfinite;
            return;
        }
        const bool ok = Dyadic::from_double(a.value) + Dyadic::from_double(b.value) ==
                        Dyadic::from_double(p.hi.value) + Dyadic::from_double(p.lo.value);
        ++r.tested;
        if (!ok) ++r.failures;
    });
    return r;
}

CensusResult prod_eft_census(const FloatFormat& fmt, uint64_t sample_pairs, uint64_t seed,
                             ProdFn fn) {
    if (!fn) fn = default_two_prod_fma;
    CensusResult r;
    for_pairs(fmt, sample_pairs, seed, [&](const LpScalar& a, const LpScalar& b) {
        const eft::Pair p = fn(fmt, a, b);
        const Dyadic prod = Dyadic::from_double(a.value) * Dyadic::from_double(b.value);
        double x_oracle;
        if (!prod.round_to_format(fmt, x_oracle)) {
            // overflowing product: the implementation must not stay finite
            if (std::isfinite(p.hi.value)) {
                ++r.tested;
                ++r.failures;
            } else {
                ++r.skipped_nonfinite;
            }
            return;
        }
        if (!std::isfinite(p.hi.value) || p.hi.value != x_oracle) {
            ++r.tested;
            ++r.failures;
            return;
        }
        const Dyadic resid = prod - Dyadic::from_double(p.hi.value);
        if (!resid.representable_in(fmt)) {
            ++r.skipped_unrepresentable;
            return;
        }
        ++r.tested;
        if (!(Dyadic::from_double(p.hi.value) + Dyadic::from_double(p.lo.value) == prod))
            ++r.failures;
    });
    return r;
}

CensusResult fast2sum_bound_census(const FloatFormat& fmt, uint64_t sample_pairs,
                                   uint64_t seed) {
    CensusResult r;
    for_pairs(fmt, sample_pairs, seed, [&](const LpScalar& a, const LpScalar& b) {
        if (std::fabs(a.value) < std::fabs(b.value)) return;
        const eft::Pair p = eft::fast2sum(fmt, a, b);
        if (!std::isfinite(p.hi.value) || !std::isfinite(p.lo.value)) {
            ++r.skipped_nonfinite;
            return;
        }
        ++r.tested;
        if (std::fabs(p.lo.value) > ulp(fmt, p.hi.value) / 2) ++r.failures;
    });
    return r;
}

std::vector<CheckLine> table1_checks() {
    struct Row {
        double beta2;
        double hi, lo;           // exact-rational expected components
        const char* hi4, *lo4;   // 4-decimal renderings
        const char* note;
    };
    // The 0.99 row's leading component renders 0.9883: round-to-nearest-even
    // admits only 0.98828125 or 0.9921875 as neighbours of 0.99, and the
    // published residual 0.0017 equals 0.99 - 0.98828125, pinning the intent.
    static const Row rows[] = {
        {0.999, 1.0, -0.00099945068359375, "1.0000", "-0.0010", ""},
        {0.99, 0.98828125, 0.00171661376953125, "0.9883", "0.0017",
         " (leading component corrected from a misprinted 0.9893)"},
        {0.95, 0.94921875, 0.000782012939453125, "0.9492", "0.0008", ""},
    };
    std::vector<CheckLine> out;
    for (const Row& row : rows) {
        const Expansion2 e = expand(kBf16, row.beta2);
        const bool exact = e.hi.value == row.hi && e.lo.value == row.lo;
        const bool rendered = render4(e.hi.value) == row.hi4 && render4(e.lo.value) == row.lo4;
        CheckLine line;
        char name[64];
        std::snprintf(name, sizeof(name), "expand(bf16, %g)", row.beta2);
        line.name = name;
        line.pass = exact && rendered;
        line.detail = "(" + render4(e.hi.value) + ", " + render4(e.lo.value) + ")" + row.note;
        out.push_back(line);
    }
    return out;
}

CheckLine memory_table_check() {
    struct Expect {
        const char* tag;
        int bytes;
    };
    static const Expect expect[] = {{"A", 8}, {"B", 10}, {"C", 12}, {"D", 16}, {"D-MW-off", 12}};
    CheckLine line;
    line.name = "memory bytes/parameter";
    line.pass = true;
    for (const auto& e : expect) {
        Strategy s;
        s.tag = strategy_tag_from_name(e.tag);
        const int got = memory_bytes_per_param(s);
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%s=%d ", e.tag, got);
        line.detail += buf;
        if (got != e.bytes) line.pass = false;
    }
    return line;
}

std::vector<CheckLine> format_checks(const FloatFormat& fmt, uint64_t sample_pairs,
                                     uint64_t seed) {
    const uint64_t samples = fmt.total_bits() <= 8 ? 0 : sample_pairs;
    const char* mode = samples == 0 ? "exhaustive" : "sampled";
    std::vector<CheckLine> out;

    const CensusResult sum = sum_eft_census(fmt, samples, seed);
    out.push_back({std::string(fmt.name) + " two_sum exactness (" + mode + ")",
                   sum.failures == 0 && sum.tested > 0, census_detail(sum)});

    const CensusResult prod = prod_eft_census(fmt, samples, seed);
    out.push_back({std::string(fmt.name) + " two_prod_fma exactness (" + mode + ")",
                   prod.failures == 0 && prod.tested > 0, census_detail(prod)});

    const CensusResult bound = fast2sum_bound_census(fmt, samples, seed);
    out.push_back({std::string(fmt.name) + " fast2sum residual bound (" + mode + ")",
                   bound.failures == 0 && bound.tested > 0, census_detail(bound)});
    return out;
}

}  // namespace collage::verify
