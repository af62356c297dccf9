#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "collage/expansion.hpp"
#include "collage/formats.hpp"
#include "collage/rng.hpp"

namespace collage {

// Learning-rate schedule: constant, or linear warmup into a cosine decay
// toward min_factor * alpha over total_steps.
struct Schedule {
    enum class Kind { kConstant, kCosineWarmup };
    Kind kind = Kind::kConstant;
    int64_t warmup_steps = 0;
    int64_t total_steps = 0;
    double min_factor = 0.0;
};

double schedule_factor(const Schedule& s, int64_t t);

struct HyperParams {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double lambda = 0.0;  // decoupled weight decay, applied inside the update
    Schedule schedule;
    // sqrt(v_hat + eps) when true (the stored-low-precision formulation);
    // sqrt(v_hat) + eps when false (the conventional one).
    bool eps_inside_sqrt = true;
    // optional global gradient-norm clip, off when <= 0
    double clip_norm = 0.0;

    void validate() const;
};

enum class StrategyTag {
    kPlainLp,            // A: everything stored and updated in the work format
    kCollageLight,       // B: parameters as length-2 expansions
    kCollagePlus,        // C: B plus expansion beta2 and second moment
    kMasterWeights,      // D: high-precision master copy and optimizer states
    kFp32StatesOnly,     // D without the master: high-precision moments only
    kKahan,              // compensated parameter updates
    kStochasticRound,    // stochastically rounded parameter updates
};

struct Strategy {
    StrategyTag tag = StrategyTag::kPlainLp;
    const FloatFormat* work_format = &kBf16;
    const FloatFormat* high_format = &kFp32;
};

// Accepts "A"/"plain", "B"/"collage-light", "C"/"collage-plus",
// "D"/"master-weights", "D-MW-off"/"fp32-optim", "kahan", "sr"
// (case-insensitive). Throws std::invalid_argument otherwise.
StrategyTag strategy_tag_from_name(const std::string& name);
std::string strategy_tag_name(StrategyTag tag);

// Per-strategy optimizer state. Only the tensors the strategy needs exist.
struct StrategyState {
    Strategy strategy;
    int64_t step = 0;

    LpTensor theta;                    // work-format parameters (shadow for D)
    std::optional<LpTensor> theta_lo;  // expansion residual (B, C) or Kahan carry
    LpTensor m;
    LpTensor v;
    std::optional<LpTensor> v_lo;         // C
    std::optional<Expansion2> beta2_exp;  // C
    std::optional<LpTensor> master;       // D
    std::optional<Rng> sr_rng;            // stochastic rounding stream

    size_t size() const { return theta.size(); }
    // Fully evaluated stored parameter values (expansion sum, theta + carry,
    // master copy), in wide precision.
    std::vector<double> param_values_wide() const;
    // The work-format view the forward/backward pass consumes.
    const LpTensor& work_view() const { return theta; }
};

struct StepReport {
    std::vector<double> intended_update;   // update tensor evaluated wide
    std::vector<double> effective_update;  // realized change of stored values
};

// Zero moments and residuals; for C the decay factor is expanded once; for D
// the master starts as the exact upcast of the work-format parameters.
// sr_seed feeds the stochastic rounding stream (ignored by other strategies).
StrategyState init_state(const Strategy& strategy, const LpTensor& initial_params,
                         const HyperParams& hp, uint64_t sr_seed = 0);

// One optimizer step; t must be state.step + 1. grad shares the work format
// and shape. update_scale multiplies the update before it reaches the
// parameters (1.0 for ordinary training). Rejects non-finite gradients.
StepReport adamw_step(StrategyState& state, const LpTensor& grad, const HyperParams& hp,
                      int64_t t, double update_scale = 1.0);

// Analytic persistent bytes per parameter (parameter + gradient + optimizer
// states + expansion/master extras).
int memory_bytes_per_param(const Strategy& strategy);

// True when the multiplicative decay (1 - alpha*lambda) * theta is absorbed
// for parameters near 1: alpha*lambda < ulp(1)/2.
bool weight_decay_threshold(const FloatFormat& fmt, double alpha, double lambda);

}  // namespace collage
