#include "banditcv/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace banditcv {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::vanilla: return "vanilla";
        case Variant::af: return "af";
        case Variant::is: return "is";
        case Variant::mf: return "mf";
        case Variant::be: return "be";
        case Variant::eh: return "eh";
    }
    throw std::logic_error("unknown Variant");
}

Variant variant_from_string(const std::string& s) {
    if (s == "vanilla") return Variant::vanilla;
    if (s == "af") return Variant::af;
    if (s == "is") return Variant::is;
    if (s == "mf") return Variant::mf;
    if (s == "be") return Variant::be;
    if (s == "eh") return Variant::eh;
    throw std::invalid_argument("unknown variant: " + s);
}

double confidence_width(int t, int d, double action_bound, double lambda, double delta) {
    if (t < 1) throw std::invalid_argument("confidence_width requires t >= 1");
    const double arg = (1.0 + t * action_bound * action_bound / lambda) / delta;
    return std::sqrt(d * std::log(arg));
}

std::vector<double> build_gate_table(int t_max, double delta, int dof_offset) {
    std::vector<double> table(static_cast<size_t>(t_max) + 1, 0.0);
    for (int t = 0; t <= t_max; ++t) {
        const int dof = t - dof_offset;
        table[t] = dof >= 1 ? dof / chi2_quantile(delta, dof) : 0.0;
    }
    return table;
}

double AfcLearner::scale() const { return std::sqrt(std::min(sigma2, hybrid.nu_bar)); }

std::vector<HistorySample> draw_history(const ProblemInstance& instance, Rng& rng, int n_h) {
    if (n_h < 1) throw std::invalid_argument("draw_history requires n_h >= 1");
    std::vector<HistorySample> samples;
    samples.reserve(n_h);
    for (int i = 0; i < n_h; ++i) {
        Vector x;
        if (instance.kind == SettingKind::linear) {
            const size_t idx = rng.next_u64() % instance.actions.size();
            x = instance.actions[idx];
        } else {
            const ActionSet set = round_actions(instance, rng);
            const size_t idx = rng.next_u64() % set.actions.size();
            x = set.actions[idx];
        }
        HistorySample s;
        s.w = sample_aux_only(instance, rng, x);
        s.x = std::move(x);
        samples.push_back(std::move(s));
    }
    return samples;
}

AuxModel fit_history_model(const std::vector<HistorySample>& samples, double lambda_g) {
    if (samples.empty()) throw std::invalid_argument("fit_history_model needs samples");
    const int d = static_cast<int>(samples[0].x.size());
    const int q = static_cast<int>(samples[0].w.size());
    Matrix gram = Matrix::identity(d);
    for (double& v : gram.data) v *= lambda_g;
    std::vector<Vector> rhs(q, Vector(d, 0.0));
    for (const auto& s : samples) {
        gram = rank1_update(std::move(gram), s.x);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < d; ++j) rhs[i][j] += s.x[j] * s.w[i];
    }
    const CholeskyFactor factor = CholeskyFactor::compute(gram);
    AuxModel model;
    model.kind = AuxKind::estimated_history;
    model.g_params.reserve(q);
    for (int i = 0; i < q; ++i) model.g_params.push_back(factor.solve(rhs[i]));
    return model;
}

AfcLearner make_learner(const ProblemInstance& instance, const VariantConfig& config,
                        Rng& history_rng) {
    AfcLearner learner;
    learner.dim = instance.dim;
    learner.lambda = instance.lambda;
    learner.action_bound = instance.action_bound;
    learner.s_bound = instance.s_bound;
    learner.delta = instance.delta;
    learner.sigma2 = instance.sigma2();
    learner.config = config;

    const int q = config.variant == Variant::vanilla ? 0 : instance.q();
    learner.log = ObservationLog(instance.dim, q);
    learner.v_bar = Matrix::identity(instance.dim);
    for (double& v : learner.v_bar.data) v *= instance.lambda;
    learner.theta_hat.assign(instance.dim, 0.0);
    learner.hybrid.beta.assign(q, 0.0);
    learner.hybrid.nu_bar = learner.sigma2;
    learner.hybrid.nu_hat = learner.sigma2;

    switch (config.variant) {
        case Variant::vanilla:
            break;
        case Variant::af:
            learner.aux.kind = AuxKind::known;
            learner.aux.g_params = instance.theta_w;
            break;
        case Variant::be: {
            learner.aux.kind = AuxKind::biased;
            learner.aux.bias = config.bias;
            learner.aux.g_params = instance.theta_w;
            // parameter offset of norm epsilon_g in a seed-derived direction; a
            // constant value shift is absorbed by the ridge and loses the
            // monotone-harm behaviour
            for (auto& tw : learner.aux.g_params) {
                Vector dir(instance.dim);
                for (double& v : dir) v = history_rng.gaussian(0.0, 1.0);
                const double n = norm2(dir);
                for (int j = 0; j < instance.dim; ++j)
                    tw[j] += config.bias * dir[j] / (n > 0.0 ? n : 1.0);
            }
            break;
        }
        case Variant::eh:
            learner.aux =
                fit_history_model(draw_history(instance, history_rng, config.history_size),
                                  config.history_ridge);
            break;
        case Variant::is:
        case Variant::mf:
            if (config.ratio < 2.0 || config.ratio != std::floor(config.ratio))
                throw std::invalid_argument("IS/MF ratio must be an integer >= 2");
            learner.aux.kind = AuxKind::sampled;
            break;
    }
    return learner;
}

namespace {

RefreshOptions refresh_options(const AfcLearner& learner) {
    RefreshOptions opts;
    opts.dof_offset = learner.config.dof_offset;
    if (learner.config.variant == Variant::is || learner.config.variant == Variant::mf) {
        opts.strategy = learner.config.variant == Variant::is ? SamplingStrategy::is
                                                              : SamplingStrategy::mf;
        opts.ratios.assign(learner.log.q, learner.config.ratio);
    }
    return opts;
}

void resolve_theta(AfcLearner& learner) {
    learner.theta_hat =
        solve_spd(learner.v_bar, hybrid_reward_aggregate(learner.log, learner.hybrid.beta));
}

}  // namespace

void begin_round(AfcLearner& learner) {
    if (learner.config.variant != Variant::vanilla) {
        RefreshOptions opts = refresh_options(learner);
        if (learner.gate_table) opts.gate_ratio_by_t = learner.gate_table.get();
        learner.hybrid =
            refresh(learner.log, learner.theta_hat, learner.sigma2, learner.delta, opts);
    }
    resolve_theta(learner);
}

int select_action(const AfcLearner& learner, const ActionSet& actions) {
    if (actions.actions.empty()) throw std::invalid_argument("select_action: empty action set");
    const double alpha = confidence_width(learner.round, learner.dim, learner.action_bound,
                                          learner.lambda, learner.delta);
    const double scale = learner.scale();
    const CholeskyFactor factor = CholeskyFactor::compute(learner.v_bar);
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(actions.actions.size()); ++i) {
        const Vector& x = actions.actions[i];
        const double norm = std::sqrt(std::max(0.0, dot(x, factor.solve(x))));
        const double ucb = dot(x, learner.theta_hat) + scale * alpha * norm;
        if (ucb > best_val) {
            best_val = ucb;
            best = i;
        }
    }
    return best;
}

void update(AfcLearner& learner, const Vector& x, double y, const Vector& w,
            const Vector& g_hat) {
    learner.log.append(x, y, w, g_hat);
    learner.v_bar = rank1_update(std::move(learner.v_bar), x);
    resolve_theta(learner);
}

void update(AfcLearner& learner, const Vector& x, double z) {
    update(learner, x, z, Vector{}, Vector{});
}

ConfidenceBound confidence_bound(const AfcLearner& learner, const Vector& x) {
    const double alpha = confidence_width(learner.round, learner.dim, learner.action_bound,
                                          learner.lambda, learner.delta);
    const double norm = std::sqrt(std::max(0.0, dot(x, solve_spd(learner.v_bar, x))));
    ConfidenceBound cb;
    cb.h_term = alpha * norm;
    cb.l_term = std::sqrt(learner.lambda) * learner.s_bound * norm;
    cb.scale = learner.scale();
    return cb;
}

StepResult step(AfcLearner& learner, const ProblemInstance& instance, const ActionSet& actions,
                Rng& noise_rng, Rng& extra_rng) {
    begin_round(learner);
    StepResult result;
    result.action_index = select_action(learner, actions);
    const Vector& x = actions.actions[result.action_index];
    result.feedback = pull(instance, noise_rng, x);

    if (learner.config.variant == Variant::vanilla) {
        update(learner, x, result.feedback.reward);
    } else if (learner.aux.kind == AuxKind::sampled) {
        // g_hat is the local mean of this round's r draws
        const int extras = static_cast<int>(learner.config.ratio) - 1;
        Vector g_hat = result.feedback.aux;
        for (int k = 0; k < extras; ++k) {
            const Vector* at = &x;
            if (!learner.config.extra_at_chosen) {
                const size_t idx = extra_rng.next_u64() % actions.actions.size();
                at = &actions.actions[idx];
            }
            const Vector draw = sample_aux_only(instance, extra_rng, *at);
            for (int i = 0; i < learner.log.q; ++i) g_hat[i] += draw[i];
        }
        for (double& v : g_hat) v /= learner.config.ratio;
        update(learner, x, result.feedback.reward, result.feedback.aux, g_hat);
    } else {
        update(learner, x, result.feedback.reward, result.feedback.aux, learner.aux.values(x));
    }

    learner.round += 1;
    result.regret = instantaneous_regret(instance, actions, x);
    return result;
}

}  // namespace banditcv
