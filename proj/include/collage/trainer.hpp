#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "collage/metrics.hpp"
#include "collage/optim.hpp"

namespace collage {

// Small supervised problems with closed-form gradients. The forward/backward
// contract emulates mixed-precision GEMM: work-format multiplicands, wide
// accumulation, one rounding of the gradient on the way out.
enum class TaskKind { kLinearRegression, kLogisticRegression, kMlp2Layer };

TaskKind task_kind_from_name(const std::string& name);
std::string task_kind_name(TaskKind kind);

struct Task {
    TaskKind kind = TaskKind::kLinearRegression;
    int input_dim = 8;
    int hidden_dim = 8;  // MLP only
    int n_samples = 256;
    double noise_std = 0.0;
    uint64_t seed = 1;

    void validate() const;
    // flat parameter count of the model
    size_t param_count() const;
};

struct Dataset {
    std::vector<double> inputs;   // n_samples x input_dim, row-major, wide
    std::vector<double> targets;  // n_samples, wide
    int input_dim = 0;
    int n_samples = 0;
};

struct RunConfig {
    Task task;
    Strategy strategy;
    HyperParams hp;
    int64_t steps = 500;
    int batch_size = 32;
    uint64_t seed = 1;        // parameter init + stochastic rounding stream
    double grad_scale = 1.0;  // update-shrink factor; < 1 induces lost arithmetic
    int64_t record_every = 10;

    void validate() const;
};

// Deterministic for a fixed task seed: inputs i.i.d. standard normal, targets
// from a hidden ground-truth model plus noise_std Gaussian noise.
Dataset gen_synthetic(const Task& task);

// Loss and work-format gradient on rows [batch_start, batch_start+batch_size)
// of the dataset, wrapping around. Throws on a non-finite loss.
struct ForwardBackwardResult {
    double loss = 0.0;
    LpTensor grad;
};
ForwardBackwardResult forward_backward(const Task& task, const LpTensor& params,
                                       const Dataset& data, int64_t batch_start,
                                       int batch_size);

// The wide-precision core behind forward_backward: input multiplicands are
// quantized to fmt, parameters are consumed as the given wide values, every
// accumulation stays wide and the gradient is returned unrounded. This is the
// smooth function the finite-difference oracle differentiates.
struct WideFwdBwd {
    double loss = 0.0;
    std::vector<double> grad;
};
WideFwdBwd forward_backward_wide(const Task& task, const FloatFormat& fmt,
                                 const std::vector<double>& params, const Dataset& data,
                                 int64_t batch_start, int batch_size);

// Work-format parameter initialization: uniform in [-r, r], r = 1/sqrt(fan_in),
// drawn from the run seed.
LpTensor init_params(const Task& task, const FloatFormat& fmt, uint64_t seed);

// Executes config.steps optimizer steps and returns one record per recorded
// step: step 0 (initial loss) plus every record_every-th step and the final
// one. record.loss is the pre-update training loss of that step.
std::vector<MetricsRecord> run(const RunConfig& config);

// As run(), but on a caller-provided dataset and initial parameters so that
// several strategies can consume identical streams.
std::vector<MetricsRecord> run_on(const RunConfig& config, const Dataset& data,
                                  const LpTensor& initial_params);

}  // namespace collage
