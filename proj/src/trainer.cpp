#include "collage/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace collage {

namespace {

// stream tags for derive_rng: one sub-stream per purpose
constexpr uint64_t kStreamInputs = 0;
constexpr uint64_t kStreamTruth = 1;
constexpr uint64_t kStreamNoise = 2;
constexpr uint64_t kStreamInit = 10;
constexpr uint64_t kStreamSr = 20;

double log1p_exp(double z) {  // ln(1 + e^z), stable both directions
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

TaskKind task_kind_from_name(const std::string& name) {
    if (name == "linear-regression") return TaskKind::kLinearRegression;
    if (name == "logistic-regression") return TaskKind::kLogisticRegression;
    if (name == "mlp-2layer") return TaskKind::kMlp2Layer;
    throw std::invalid_argument("unknown task kind: " + name);
}

std::string task_kind_name(TaskKind kind) {
    switch (kind) {
        case TaskKind::kLinearRegression: return "linear-regression";
        case TaskKind::kLogisticRegression: return "logistic-regression";
        case TaskKind::kMlp2Layer: return "mlp-2layer";
    }
    return "?";
}

void Task::validate() const {
    if (input_dim < 1) throw std::invalid_argument("task: input_dim must be >= 1");
    if (kind == TaskKind::kMlp2Layer && hidden_dim < 1)
        throw std::invalid_argument("task: hidden_dim must be >= 1");
    if (n_samples < 1) throw std::invalid_argument("task: n_samples must be >= 1");
    if (!(noise_std >= 0)) throw std::invalid_argument("task: noise_std must be >= 0");
}

size_t Task::param_count() const {
    switch (kind) {
        case TaskKind::kLinearRegression:
        case TaskKind::kLogisticRegression:
            return static_cast<size_t>(input_dim);
        case TaskKind::kMlp2Layer:
            return static_cast<size_t>(hidden_dim) * input_dim + hidden_dim;
    }
    return 0;
}

void RunConfig::validate() const {
    task.validate();
    hp.validate();
    if (steps < 1) throw std::invalid_argument("config: steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (task.n_samples < batch_size)
        throw std::invalid_argument("config: n_samples must cover one batch");
    if (record_every < 1) throw std::invalid_argument("config: record_every must be >= 1");
    if (!(grad_scale > 0)) throw std::invalid_argument("config: grad_scale must be > 0");
}

Dataset gen_synthetic(const Task& task) {
    task.validate();
    Rng rin = derive_rng(task.seed, kStreamInputs);
    Rng rtruth = derive_rng(task.seed, kStreamTruth);
    Rng rnoise = derive_rng(task.seed, kStreamNoise);

    Dataset d;
    d.input_dim = task.input_dim;
    d.n_samples = task.n_samples;
    d.inputs.resize(static_cast<size_t>(task.n_samples) * task.input_dim);
    d.targets.resize(task.n_samples);
    for (auto& x : d.inputs) x = rin.gaussian();

    switch (task.kind) {
        case TaskKind::kLinearRegression: {
            std::vector<double> w(task.input_dim);
            const double scale = 1.0 / std::sqrt(double(task.input_dim));
            for (auto& wi : w) wi = rtruth.gaussian() * scale;
            for (int r = 0; r < task.n_samples; ++r) {
                double y = 0;
                for (int j = 0; j < task.input_dim; ++j)
                    y += d.inputs[size_t(r) * task.input_dim + j] * w[j];
                d.targets[r] = y + task.noise_std * rnoise.gaussian();
            }
            break;
        }
        case TaskKind::kLogisticRegression: {
            std::vector<double> w(task.input_dim);
            const double scale = 1.0 / std::sqrt(double(task.input_dim));
            for (auto& wi : w) wi = rtruth.gaussian() * scale;
            for (int r = 0; r < task.n_samples; ++r) {
                double z = 0;
                for (int j = 0; j < task.input_dim; ++j)
                    z += d.inputs[size_t(r) * task.input_dim + j] * w[j];
                z += task.noise_std * rnoise.gaussian();
                d.targets[r] = z > 0 ? 1.0 : 0.0;
            }
            break;
        }
        case TaskKind::kMlp2Layer: {
            std::vector<double> w1(size_t(task.hidden_dim) * task.input_dim);
            std::vector<double> w2(task.hidden_dim);
            const double s1 = 1.0 / std::sqrt(double(task.input_dim));
            const double s2 = 1.0 / std::sqrt(double(task.hidden_dim));
            for (auto& v : w1) v = rtruth.gaussian() * s1;
            for (auto& v : w2) v = rtruth.gaussian() * s2;
            for (int r = 0; r < task.n_samples; ++r) {
                double y = 0;
                for (int i = 0; i < task.hidden_dim; ++i) {
                    double z = 0;
                    for (int j = 0; j < task.input_dim; ++j)
                        z += d.inputs[size_t(r) * task.input_dim + j] *
                             w1[size_t(i) * task.input_dim + j];
                    y += w2[i] * std::tanh(z);
                }
                d.targets[r] = y + task.noise_std * rnoise.gaussian();
            }
            break;
        }
    }
    return d;
}

WideFwdBwd forward_backward_wide(const Task& task, const FloatFormat& fmt,
                                 const std::vector<double>& params, const Dataset& data,
                                 int64_t batch_start, int batch_size) {
    if (params.size() != task.param_count())
        throw std::invalid_argument("forward_backward: parameter count mismatch");
    WideFwdBwd out;
    out.grad.assign(params.size(), 0.0);
    const int d = data.input_dim;
    std::vector<double> xq(d);
    const double inv_b = 1.0 / batch_size;

    for (int b = 0; b < batch_size; ++b) {
        const int64_t row = (batch_start + b) % data.n_samples;
        for (int j = 0; j < d; ++j)
            xq[j] = round_to(fmt, data.inputs[size_t(row) * d + j]).value;
        const double y = data.targets[row];

        switch (task.kind) {
            case TaskKind::kLinearRegression: {
                double pred = 0;
                for (int j = 0; j < d; ++j) pred += params[j] * xq[j];
                const double r = pred - y;
                out.loss += 0.5 * r * r * inv_b;
                for (int j = 0; j < d; ++j) out.grad[j] += r * xq[j] * inv_b;
                break;
            }
            case TaskKind::kLogisticRegression: {
                double z = 0;
                for (int j = 0; j < d; ++j) z += params[j] * xq[j];
                out.loss += (log1p_exp(z) - y * z) * inv_b;
                const double p = 1.0 / (1.0 + std::exp(-z));
                for (int j = 0; j < d; ++j) out.grad[j] += (p - y) * xq[j] * inv_b;
                break;
            }
            case TaskKind::kMlp2Layer: {
                const int h = task.hidden_dim;
                const double* w1 = params.data();
                const double* w2 = params.data() + size_t(h) * d;
                double* g1 = out.grad.data();
                double* g2 = out.grad.data() + size_t(h) * d;
                std::vector<double> act(h);
                double pred = 0;
                for (int i = 0; i < h; ++i) {
                    double z = 0;
                    for (int j = 0; j < d; ++j) z += w1[size_t(i) * d + j] * xq[j];
                    act[i] = std::tanh(z);
                    pred += w2[i] * act[i];
                }
                const double r = pred - y;
                out.loss += 0.5 * r * r * inv_b;
                for (int i = 0; i < h; ++i) {
                    g2[i] += r * act[i] * inv_b;
                    const double dz = r * w2[i] * (1.0 - act[i] * act[i]);
                    for (int j = 0; j < d; ++j) g1[size_t(i) * d + j] += dz * xq[j] * inv_b;
                }
                break;
            }
        }
    }
    if (!std::isfinite(out.loss)) throw std::domain_error("forward_backward: non-finite loss");
    return out;
}

ForwardBackwardResult forward_backward(const Task& task, const LpTensor& params,
                                       const Dataset& data, int64_t batch_start,
                                       int batch_size) {
    const auto wide = forward_backward_wide(task, params.format(), params.values(), data,
                                            batch_start, batch_size);
    ForwardBackwardResult out;
    out.loss = wide.loss;
    out.grad = LpTensor(params.format(), wide.grad.size());
    for (size_t i = 0; i < wide.grad.size(); ++i) out.grad.set_rounded(i, wide.grad[i]);
    return out;
}

LpTensor init_params(const Task& task, const FloatFormat& fmt, uint64_t seed) {
    Rng rng = derive_rng(seed, kStreamInit);
    LpTensor p(fmt, task.param_count());
    const auto fill = [&](size_t begin, size_t count, int fan_in) {
        const double r = 1.0 / std::sqrt(double(fan_in));
        for (size_t i = begin; i < begin + count; ++i)
            p.set_rounded(i, (rng.uniform01() * 2.0 - 1.0) * r);
    };
    if (task.kind == TaskKind::kMlp2Layer) {
        fill(0, size_t(task.hidden_dim) * task.input_dim, task.input_dim);
        fill(size_t(task.hidden_dim) * task.input_dim, task.hidden_dim, task.hidden_dim);
    } else {
        fill(0, task.param_count(), task.input_dim);
    }
    return p;
}

std::vector<MetricsRecord> run_on(const RunConfig& config, const Dataset& data,
                                  const LpTensor& initial_params) {
    config.validate();
    StrategyState state = init_state(config.strategy, initial_params, config.hp,
                                     derive_rng(config.seed, kStreamSr).next_u64());

    std::vector<MetricsRecord> records;
    const auto param_norm = [&] { return l2_norm(state.param_values_wide()); };

    {
        MetricsRecord r0;
        r0.step = 0;
        r0.loss = forward_backward(config.task, state.work_view(), data, 0, config.batch_size)
                      .loss;
        r0.param_norm = param_norm();
        records.push_back(r0);
    }

    for (int64_t t = 1; t <= config.steps; ++t) {
        const int64_t batch_start =
            ((t - 1) * config.batch_size) % data.n_samples;
        ForwardBackwardResult fb;
        try {
            fb = forward_backward(config.task, state.work_view(), data, batch_start,
                                  config.batch_size);
        } catch (const std::exception& e) {
            throw std::runtime_error("step " + std::to_string(t) + ": " + e.what());
        }
        StepReport rep;
        try {
            rep = adamw_step(state, fb.grad, config.hp, t, config.grad_scale);
        } catch (const std::exception& e) {
            throw std::runtime_error("step " + std::to_string(t) + ": " + e.what());
        }

        if (t % config.record_every == 0 || t == config.steps) {
            MetricsRecord r;
            r.step = t;
            r.loss = fb.loss;
            r.intended_norm = l2_norm(rep.intended_update);
            r.effective_norm = l2_norm(rep.effective_update);
            r.edq = edq(rep.intended_update, rep.effective_update);
            r.imprecision_pct = imprecision_pct(rep.intended_update, rep.effective_update);
            r.param_norm = param_norm();
            records.push_back(r);
        }
    }
    return records;
}

std::vector<MetricsRecord> run(const RunConfig& config) {
    config.validate();
    const Dataset data = gen_synthetic(config.task);
    const LpTensor params = init_params(config.task, *config.strategy.work_format, config.seed);
    return run_on(config, data, params);
}

}  // namespace collage
