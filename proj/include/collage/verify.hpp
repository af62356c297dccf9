#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "collage/eft.hpp"
#include "collage/formats.hpp"

namespace collage::verify {

// Exactness/bound censuses against the dyadic-rational oracle. Pairs whose
// identity is unattainable by arithmetic are counted, not failed: operations
// that leave the finite range (skipped_nonfinite) and products whose exact
// residual is below the format's lattice (skipped_unrepresentable).
struct CensusResult {
    uint64_t tested = 0;
    uint64_t failures = 0;
    uint64_t skipped_nonfinite = 0;
    uint64_t skipped_unrepresentable = 0;
};

using SumFn = eft::Pair (*)(const FloatFormat&, const LpScalar&, const LpScalar&);
using ProdFn = eft::Pair (*)(const FloatFormat&, const LpScalar&, const LpScalar&);

// sample_pairs == 0 runs the exhaustive pair census (formats up to 16 bits).
// fn defaults to the production algorithms; tests may inject mutants to prove
// the census catches them.
CensusResult sum_eft_census(const FloatFormat& fmt, uint64_t sample_pairs, uint64_t seed,
                            SumFn fn = nullptr);
CensusResult prod_eft_census(const FloatFormat& fmt, uint64_t sample_pairs, uint64_t seed,
                             ProdFn fn = nullptr);
// |y| <= ulp(x)/2 over the |a| >= |b| domain.
CensusResult fast2sum_bound_census(const FloatFormat& fmt, uint64_t sample_pairs,
                                   uint64_t seed);

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Decay-factor expansion reproduction (0.999, 0.99, 0.95 in bf16) against
// exact-rational expected components and their 4-decimal renderings.
std::vector<CheckLine> table1_checks();
CheckLine memory_table_check();

// Full verification battery for one format: exhaustive censuses for 8-bit
// formats, sampled (sample_pairs) otherwise.
std::vector<CheckLine> format_checks(const FloatFormat& fmt, uint64_t sample_pairs,
                                     uint64_t seed);

}  // namespace collage::verify
