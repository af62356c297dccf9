#include "collage/optim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace collage {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

double schedule_factor(const Schedule& s, int64_t t) {
    if (s.kind == Schedule::Kind::kConstant) return 1.0;
    if (s.warmup_steps > 0 && t <= s.warmup_steps)
        return static_cast<double>(t) / static_cast<double>(s.warmup_steps);
    const int64_t span = std::max<int64_t>(1, s.total_steps - s.warmup_steps);
    const double progress =
        std::min(1.0, static_cast<double>(t - s.warmup_steps) / static_cast<double>(span));
    return s.min_factor + (1.0 - s.min_factor) * 0.5 * (1.0 + std::cos(kPi * progress));
}

void HyperParams::validate() const {
    if (!(alpha > 0)) throw std::invalid_argument("hyperparams: alpha must be > 0");
    if (!(beta1 >= 0 && beta1 < 1)) throw std::invalid_argument("hyperparams: beta1 in [0,1)");
    if (!(beta2 >= 0 && beta2 < 1)) throw std::invalid_argument("hyperparams: beta2 in [0,1)");
    if (!(epsilon > 0)) throw std::invalid_argument("hyperparams: epsilon must be > 0");
    if (!(lambda >= 0)) throw std::invalid_argument("hyperparams: lambda must be >= 0");
}

StrategyTag strategy_tag_from_name(const std::string& name) {
    const std::string n = lower(name);
    if (n == "a" || n == "plain") return StrategyTag::kPlainLp;
    if (n == "b" || n == "collage-light") return StrategyTag::kCollageLight;
    if (n == "c" || n == "collage-plus") return StrategyTag::kCollagePlus;
    if (n == "d" || n == "master-weights") return StrategyTag::kMasterWeights;
    if (n == "d-mw-off" || n == "fp32-optim") return StrategyTag::kFp32StatesOnly;
    if (n == "kahan") return StrategyTag::kKahan;
    if (n == "sr") return StrategyTag::kStochasticRound;
    throw std::invalid_argument("unknown strategy: " + name);
}

std::string strategy_tag_name(StrategyTag tag) {
    switch (tag) {
        case StrategyTag::kPlainLp: return "A";
        case StrategyTag::kCollageLight: return "B";
        case StrategyTag::kCollagePlus: return "C";
        case StrategyTag::kMasterWeights: return "D";
        case StrategyTag::kFp32StatesOnly: return "D-MW-off";
        case StrategyTag::kKahan: return "kahan";
        case StrategyTag::kStochasticRound: return "sr";
    }
    return "?";
}

std::vector<double> StrategyState::param_values_wide() const {
    std::vector<double> out(size());
    switch (strategy.tag) {
        case StrategyTag::kCollageLight:
        case StrategyTag::kCollagePlus:
        case StrategyTag::kKahan:
            for (size_t i = 0; i < out.size(); ++i) out[i] = theta[i] + (*theta_lo)[i];
            break;
        case StrategyTag::kMasterWeights:
            for (size_t i = 0; i < out.size(); ++i) out[i] = (*master)[i];
            break;
        default:
            for (size_t i = 0; i < out.size(); ++i) out[i] = theta[i];
            break;
    }
    return out;
}

StrategyState init_state(const Strategy& strategy, const LpTensor& initial_params,
                         const HyperParams& hp, uint64_t sr_seed) {
    hp.validate();
    if (&initial_params.format() != strategy.work_format)
        throw std::invalid_argument("init_state: parameters not in the work format");

    const FloatFormat& work = *strategy.work_format;
    const FloatFormat& high = *strategy.high_format;
    const size_t n = initial_params.size();
    const bool high_moments = strategy.tag == StrategyTag::kMasterWeights ||
                              strategy.tag == StrategyTag::kFp32StatesOnly;

    StrategyState s;
    s.strategy = strategy;
    s.theta = initial_params;
    s.m = LpTensor(high_moments ? high : work, n);
    s.v = LpTensor(high_moments ? high : work, n);

    switch (strategy.tag) {
        case StrategyTag::kCollagePlus:
            s.v_lo = LpTensor(work, n);
            s.beta2_exp = expand(work, hp.beta2);
            [[fallthrough]];
        case StrategyTag::kCollageLight:
        case StrategyTag::kKahan:
            s.theta_lo = LpTensor(work, n);
            break;
        case StrategyTag::kMasterWeights: {
            LpTensor master(high, n);
            for (size_t i = 0; i < n; ++i) {
                // exact upcast: every work-format value is representable in
                // the high format for the built-in pairs
                master.set_rounded(i, initial_params[i]);
                if (master[i] != initial_params[i])
                    throw std::invalid_argument("init_state: work format not a subset of high");
            }
            s.master = std::move(master);
            break;
        }
        case StrategyTag::kStochasticRound:
            s.sr_rng = Rng(sr_seed);
            break;
        default:
            break;
    }
    return s;
}

namespace {

struct StepContext {
    const FloatFormat* fmt;  // format of moments and the update tensor
    double bc1, bc2;         // bias corrections, wide
    double one_minus_b1, one_minus_b2;
    LpScalar beta1_f, beta2_f;  // decay factors rounded into fmt
    double alpha_t, lambda, epsilon;
    bool eps_inside_sqrt;
    double update_scale;
};

// Bias correction and update value from the freshly updated moments;
// v_hat_src is the evaluated stored second moment (expansion sum for C).
LpScalar update_from_moments(const StepContext& c, const LpScalar& m_i, double v_hat_src,
                             double theta_prev) {
    const FloatFormat& f = *c.fmt;
    const LpScalar m_hat = round_to(f, m_i.value / c.bc1);
    const LpScalar v_hat = round_to(f, v_hat_src / c.bc2);
    LpScalar denom;
    if (c.eps_inside_sqrt) {
        denom = lp_sqrt(f, round_to(f, v_hat.value + c.epsilon));
    } else {
        denom = round_to(f, lp_sqrt(f, v_hat).value + c.epsilon);
    }
    const LpScalar quot = lp_div(f, m_hat, denom);
    return round_to(f, -c.alpha_t * c.update_scale *
                           (quot.value + c.lambda * theta_prev));
}

}  // namespace

StepReport adamw_step(StrategyState& state, const LpTensor& grad, const HyperParams& hp,
                      int64_t t, double update_scale) {
    hp.validate();
    if (t != state.step + 1) throw std::invalid_argument("adamw_step: t must be step + 1");
    if (&grad.format() != state.strategy.work_format)
        throw std::invalid_argument("adamw_step: gradient format mismatch");
    if (grad.size() != state.size())
        throw std::invalid_argument("adamw_step: gradient shape mismatch");
    for (size_t i = 0; i < grad.size(); ++i)
        if (!std::isfinite(grad[i]))
            throw std::domain_error("adamw_step: non-finite gradient, step rejected");

    const Strategy& st = state.strategy;
    const FloatFormat& work = *st.work_format;
    const bool high_moments = st.tag == StrategyTag::kMasterWeights ||
                              st.tag == StrategyTag::kFp32StatesOnly;
    const FloatFormat& mfmt = high_moments ? *st.high_format : work;

    // Scalar quantities stay wide until they touch a tensor.
    StepContext c;
    c.fmt = &mfmt;
    c.bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
    c.bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
    c.one_minus_b1 = 1.0 - hp.beta1;
    c.one_minus_b2 = 1.0 - hp.beta2;
    c.beta1_f = round_to(mfmt, hp.beta1);
    c.beta2_f = round_to(mfmt, hp.beta2);
    c.alpha_t = hp.alpha * schedule_factor(hp.schedule, t);
    c.lambda = hp.lambda;
    c.epsilon = hp.epsilon;
    c.eps_inside_sqrt = hp.eps_inside_sqrt;
    c.update_scale = update_scale;

    // Optional global-norm clip, computed wide on the work-format gradient.
    const LpTensor* g = &grad;
    LpTensor clipped;
    if (hp.clip_norm > 0) {
        double norm = 0;
        for (size_t i = 0; i < grad.size(); ++i) norm += grad[i] * grad[i];
        norm = std::sqrt(norm);
        if (norm > hp.clip_norm) {
            const double scale = hp.clip_norm / norm;
            clipped = LpTensor(work, grad.size());
            for (size_t i = 0; i < grad.size(); ++i)
                clipped.set_rounded(i, grad[i] * scale);
            g = &clipped;
        }
    }

    const size_t n = state.size();
    StepReport report;
    report.intended_update.resize(n);
    report.effective_update.resize(n);
    const std::vector<double> before = state.param_values_wide();

    for (size_t i = 0; i < n; ++i) {
        // gradient enters the moment format exactly (work values are a subset
        // of the high format)
        const LpScalar gi{(*g)[i], &mfmt};
        LpScalar m_i = state.m.scalar(i);
        m_i = lp_add(mfmt, lp_mul(mfmt, c.beta1_f, m_i),
                     round_to(mfmt, c.one_minus_b1 * gi.value));
        state.m.set(i, m_i);

        double v_src;
        if (st.tag == StrategyTag::kCollagePlus) {
            const LpScalar g2 = lp_mul(work, gi, gi);
            const LpScalar inc = round_to(work, c.one_minus_b2 * g2.value);
            Expansion2 v_exp{state.v.scalar(i), state.v_lo->scalar(i)};
            v_exp = safe_grow(work, mul(work, *state.beta2_exp, v_exp), inc);
            state.v.set(i, v_exp.hi);
            state.v_lo->set(i, v_exp.lo);
            v_src = eval_wide(v_exp);
        } else {
            const LpScalar g2 = lp_mul(mfmt, gi, gi);
            const LpScalar inc = round_to(mfmt, c.one_minus_b2 * g2.value);
            LpScalar v_i = lp_add(mfmt, lp_mul(mfmt, c.beta2_f, state.v.scalar(i)), inc);
            state.v.set(i, v_i);
            v_src = v_i.value;
        }
        if (!std::isfinite(state.m[i]) || !std::isfinite(v_src))
            throw std::overflow_error("adamw_step: moment overflow");

        // decay is taken at the parameter the arithmetic sees: the master for
        // D, the leading component elsewhere
        const double theta_prev =
            st.tag == StrategyTag::kMasterWeights ? (*state.master)[i] : state.theta[i];
        const LpScalar delta = update_from_moments(c, m_i, v_src, theta_prev);
        report.intended_update[i] = delta.value;

        switch (st.tag) {
            case StrategyTag::kPlainLp:
                state.theta.set(i, lp_add(work, state.theta.scalar(i), delta));
                break;
            case StrategyTag::kCollageLight:
            case StrategyTag::kCollagePlus: {
                Expansion2 th{state.theta.scalar(i), state.theta_lo->scalar(i)};
                th = safe_grow(work, th, delta);
                state.theta.set(i, th.hi);
                state.theta_lo->set(i, th.lo);
                break;
            }
            case StrategyTag::kMasterWeights: {
                const LpScalar master_new = lp_add(mfmt, state.master->scalar(i), delta);
                state.master->set(i, master_new);
                state.theta.set_rounded(i, master_new.value);  // refresh the shadow
                break;
            }
            case StrategyTag::kFp32StatesOnly:
                // high-format update applied to work-format parameters in one
                // rounding
                state.theta.set_rounded(i, state.theta[i] + delta.value);
                break;
            case StrategyTag::kKahan: {
                const LpScalar carry = state.theta_lo->scalar(i);
                const LpScalar delta_c = lp_add(work, delta, carry);
                const LpScalar theta_old = state.theta.scalar(i);
                const LpScalar theta_new = lp_add(work, theta_old, delta_c);
                const LpScalar realized = lp_sub(work, theta_new, theta_old);
                state.theta.set(i, theta_new);
                state.theta_lo->set(i, lp_sub(work, delta_c, realized));
                break;
            }
            case StrategyTag::kStochasticRound:
                state.theta.set(
                    i, stochastic_round(work, state.theta[i] + delta.value, *state.sr_rng));
                break;
        }
    }

    const std::vector<double> after = state.param_values_wide();
    for (size_t i = 0; i < n; ++i) {
        report.effective_update[i] = after[i] - before[i];
        if (!std::isfinite(after[i]))
            throw std::overflow_error("adamw_step: parameter overflow");
    }
    state.step = t;
    return report;
}

int memory_bytes_per_param(const Strategy& strategy) {
    const int w = strategy.work_format->storage_bytes();
    const int h = strategy.high_format->storage_bytes();
    const int param_grad = 2 * w;
    switch (strategy.tag) {
        case StrategyTag::kPlainLp: return param_grad + 2 * w;
        case StrategyTag::kCollageLight: return param_grad + 2 * w + w;
        case StrategyTag::kCollagePlus: return param_grad + 2 * w + 2 * w;
        case StrategyTag::kMasterWeights: return param_grad + 2 * h + h;
        case StrategyTag::kFp32StatesOnly: return param_grad + 2 * h;
        case StrategyTag::kKahan: return param_grad + 2 * w + w;
        case StrategyTag::kStochasticRound: return param_grad + 2 * w;
    }
    return 0;
}

bool weight_decay_threshold(const FloatFormat& fmt, double alpha, double lambda) {
    if (!(alpha > 0) || !(lambda > 0))
        throw std::invalid_argument("weight_decay_threshold: alpha, lambda must be > 0");
    return alpha * lambda < ulp(fmt, 1.0) / 2;
}

}  // namespace collage
