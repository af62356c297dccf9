#pragma once
#include <cstdint>
#include <vector>

namespace collage {

// One recorded training step. intended_norm == 0 marks a degenerate step
// (edq is defined as 0 there).
struct MetricsRecord {
    int64_t step = 0;
    double loss = 0.0;
    double edq = 0.0;
    double intended_norm = 0.0;
    double effective_norm = 0.0;
    double imprecision_pct = 0.0;
    double param_norm = 0.0;
};

// Realized parameter change theta_t - theta_{t-1}; both vectors hold the
// strategy's fully evaluated stored parameters (expansion sums, master copy).
std::vector<double> effective_update(const std::vector<double>& theta_prev_wide,
                                     const std::vector<double>& theta_new_wide);

// Effective descent quality: <intended/||intended||, effective>, 0 when the
// intended update is zero.
double edq(const std::vector<double>& intended, const std::vector<double>& effective);

// Percentage of parameters whose intended update was nonzero but whose stored
// value did not move.
double imprecision_pct(const std::vector<double>& intended,
                       const std::vector<double>& effective);

double l2_norm(const std::vector<double>& x);

}  // namespace collage
