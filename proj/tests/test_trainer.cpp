#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "collage/trainer.hpp"

using namespace collage;

namespace {

Task default_linear() {
    Task t;
    t.kind = TaskKind::kLinearRegression;
    t.input_dim = 8;
    t.n_samples = 256;
    t.noise_std = 0.01;
    t.seed = 1;
    return t;
}

RunConfig default_config() {
    RunConfig c;
    c.task = default_linear();
    c.strategy = {StrategyTag::kMasterWeights, &kBf16, &kFp32};
    c.hp.alpha = 0.02;
    c.hp.beta1 = 0.9;
    c.hp.beta2 = 0.999;
    c.hp.epsilon = 1e-8;
    c.steps = 200;
    c.batch_size = 32;
    c.seed = 5;
    c.record_every = 10;
    return c;
}

}  // namespace

TEST_CASE("dataset determinism and moments") {
    const Task t = default_linear();
    const Dataset a = gen_synthetic(t);
    const Dataset b = gen_synthetic(t);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == b.targets);

    Task t2 = t;
    t2.seed = 2;
    CHECK(gen_synthetic(t2).inputs != a.inputs);

    // sample mean of unit gaussians within 5 sigma / sqrt(n)
    double mean = 0;
    for (double x : a.inputs) mean += x;
    mean /= double(a.inputs.size());
    CHECK(std::fabs(mean) <= 5.0 / std::sqrt(double(a.inputs.size())));
}

TEST_CASE("noiseless linear targets are exactly linear") {
    Task t = default_linear();
    t.noise_std = 0.0;
    const Dataset d = gen_synthetic(t);
    // fit the generating weights from d rows via the exact relation: targets
    // must be reproducible from any input row with one weight vector. Verify
    // rank-style consistency: y(r1 + r2 combination) is linear, checked by
    // solving on input_dim rows then predicting the rest.
    const int dim = t.input_dim;
    std::vector<double> w(dim, 0.0);
    // Gaussian elimination on the first dim rows
    std::vector<double> A(size_t(dim) * (dim + 1));
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) A[size_t(r) * (dim + 1) + c] = d.inputs[size_t(r) * dim + c];
        A[size_t(r) * (dim + 1) + dim] = d.targets[r];
    }
    for (int col = 0; col < dim; ++col) {
        int piv = col;
        for (int r = col + 1; r < dim; ++r)
            if (std::fabs(A[size_t(r) * (dim + 1) + col]) >
                std::fabs(A[size_t(piv) * (dim + 1) + col]))
                piv = r;
        for (int c = 0; c <= dim; ++c)
            std::swap(A[size_t(col) * (dim + 1) + c], A[size_t(piv) * (dim + 1) + c]);
        const double p = A[size_t(col) * (dim + 1) + col];
        REQUIRE(p != 0.0);
        for (int r = 0; r < dim; ++r) {
            if (r == col) continue;
            const double f = A[size_t(r) * (dim + 1) + col] / p;
            for (int c = 0; c <= dim; ++c)
                A[size_t(r) * (dim + 1) + c] -= f * A[size_t(col) * (dim + 1) + c];
        }
    }
    for (int r = 0; r < dim; ++r) w[r] = A[size_t(r) * (dim + 1) + dim] / A[size_t(r) * (dim + 1) + r];
    for (int r = dim; r < t.n_samples; ++r) {
        double pred = 0;
        for (int c = 0; c < dim; ++c) pred += w[c] * d.inputs[size_t(r) * dim + c];
        CHECK(pred == doctest::Approx(d.targets[r]).epsilon(1e-9));
    }
}

TEST_CASE("zero-weight logistic loss is ln 2") {
    Task t = default_linear();
    t.kind = TaskKind::kLogisticRegression;
    const Dataset d = gen_synthetic(t);
    const LpTensor zero(kBf16, t.param_count());
    const auto fb = forward_backward(t, zero, d, 0, 64);
    CHECK(fb.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("doubling the targets doubles the residual gradient at zero weights") {
    Task t = default_linear();
    Dataset d = gen_synthetic(t);
    const LpTensor zero(kBf16, t.param_count());
    const auto g1 = forward_backward_wide(t, kBf16, std::vector<double>(t.param_count(), 0.0),
                                          d, 0, 32);
    for (auto& y : d.targets) y *= 2.0;
    const auto g2 = forward_backward_wide(t, kBf16, std::vector<double>(t.param_count(), 0.0),
                                          d, 0, 32);
    for (size_t i = 0; i < g1.grad.size(); ++i)
        CHECK(g2.grad[i] == doctest::Approx(2.0 * g1.grad[i]).epsilon(1e-12));
}

TEST_CASE("finite differences confirm the analytic wide gradient") {
    for (TaskKind kind :
         {TaskKind::kLinearRegression, TaskKind::kLogisticRegression, TaskKind::kMlp2Layer}) {
        CAPTURE(task_kind_name(kind));
        Task t = default_linear();
        t.kind = kind;
        t.hidden_dim = 4;
        t.noise_std = 0.05;
        const Dataset d = gen_synthetic(t);
        const LpTensor p0 = init_params(t, kBf16, 42);
        std::vector<double> params(p0.values());

        const auto base = forward_backward_wide(t, kBf16, params, d, 0, 32);
        Rng rng(kind == TaskKind::kMlp2Layer ? 3u : 4u);
        for (int probe = 0; probe < 10; ++probe) {
            const size_t j = rng.next_below(params.size());
            const double h = 1e-3 * std::max(1e-3, std::fabs(params[j]));
            auto plus = params, minus = params;
            plus[j] += h;
            minus[j] -= h;
            const double lp = forward_backward_wide(t, kBf16, plus, d, 0, 32).loss;
            const double lm = forward_backward_wide(t, kBf16, minus, d, 0, 32).loss;
            const double fd = (lp - lm) / (2 * h);
            const double scale = std::max({1e-8, std::fabs(fd), std::fabs(base.grad[j])});
            CHECK(std::fabs(fd - base.grad[j]) / scale <= 1e-4);
        }
    }
}

TEST_CASE("gradient is the rounded wide gradient") {
    const Task t = default_linear();
    const Dataset d = gen_synthetic(t);
    const LpTensor p = init_params(t, kBf16, 9);
    const auto fb = forward_backward(t, p, d, 0, 32);
    const auto wide = forward_backward_wide(t, kBf16, p.values(), d, 0, 32);
    CHECK(fb.loss == wide.loss);
    for (size_t i = 0; i < fb.grad.size(); ++i)
        CHECK(fb.grad[i] == round_to(kBf16, wide.grad[i]).value);
}

TEST_CASE("run records and determinism") {
    const RunConfig c = default_config();
    const auto r1 = run(c);
    const auto r2 = run(c);
    REQUIRE(r1.size() == size_t(c.steps / c.record_every) + 1);
    CHECK(r1.front().step == 0);
    CHECK(r1.back().step == c.steps);
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].loss == r2[i].loss);
        CHECK(r1[i].edq == r2[i].edq);
        CHECK(r1[i].param_norm == r2[i].param_norm);
    }
}

TEST_CASE("loss decreases on the default linear task for every strategy") {
    for (StrategyTag tag :
         {StrategyTag::kPlainLp, StrategyTag::kCollageLight, StrategyTag::kCollagePlus,
          StrategyTag::kMasterWeights, StrategyTag::kFp32StatesOnly, StrategyTag::kKahan,
          StrategyTag::kStochasticRound}) {
        RunConfig c = default_config();
        c.strategy.tag = tag;
        const auto records = run(c);
        CAPTURE(strategy_tag_name(tag));
        CHECK(records.back().loss < records.front().loss);
    }
}

TEST_CASE("master-weights run matches an all-fp32 reference loop") {
    const RunConfig c = default_config();
    const auto records = run(c);

    // independent loop: native float AdamW over the same data pipeline
    const Dataset data = gen_synthetic(c.task);
    const LpTensor p0 = init_params(c.task, kBf16, c.seed);
    const size_t n = p0.size();
    std::vector<float> master(n), m(n, 0.0f), v(n, 0.0f);
    for (size_t i = 0; i < n; ++i) master[i] = float(p0[i]);

    double final_loss = 0;
    for (int64_t t = 1; t <= c.steps; ++t) {
        // forward at the bf16 shadow of the master
        LpTensor shadow(kBf16, n);
        for (size_t i = 0; i < n; ++i) shadow.set_rounded(i, double(master[i]));
        const int64_t batch_start = ((t - 1) * c.batch_size) % data.n_samples;
        const auto fb = forward_backward(c.task, shadow, data, batch_start, c.batch_size);
        final_loss = fb.loss;
        const double bc1 = 1.0 - std::pow(c.hp.beta1, double(t));
        const double bc2 = 1.0 - std::pow(c.hp.beta2, double(t));
        for (size_t i = 0; i < n; ++i) {
            const float g = float(fb.grad[i]);
            m[i] = float(float(c.hp.beta1) * m[i]) + float((1.0 - c.hp.beta1) * double(g));
            v[i] = float(float(c.hp.beta2) * v[i]) +
                   float((1.0 - c.hp.beta2) * double(float(g * g)));
            const float m_hat = float(double(m[i]) / bc1);
            const float v_hat = float(double(v[i]) / bc2);
            const float denom = std::sqrt(float(double(v_hat) + c.hp.epsilon));
            const float quot = m_hat / denom;
            const float delta =
                float(-c.hp.alpha * (double(quot) + c.hp.lambda * double(master[i])));
            master[i] = master[i] + delta;
        }
    }
    CHECK(std::fabs(records.back().loss - final_loss) <= 1e-6);
}

TEST_CASE("update-shrink factor induces sustained lost arithmetic on plain bf16") {
    RunConfig c = default_config();
    c.strategy.tag = StrategyTag::kPlainLp;
    c.hp.alpha = 0.02;
    c.grad_scale = 0.005;  // updates around 1e-3 of the parameter scale
    c.steps = 300;
    c.record_every = 10;
    const auto records = run(c);
    int sustained = 0, counted = 0;
    for (const auto& r : records) {
        if (r.step <= 50) continue;
        ++counted;
        if (r.imprecision_pct > 50.0) ++sustained;
    }
    CHECK(counted > 0);
    CHECK(sustained == counted);
}

TEST_CASE("config validation") {
    RunConfig c = default_config();
    c.steps = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = default_config();
    c.batch_size = 1000;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = default_config();
    c.task.input_dim = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
