#include "banditcv/environments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace banditcv {

std::string to_string(SettingKind kind) {
    switch (kind) {
        case SettingKind::linear: return "linear";
        case SettingKind::linear_contextual: return "linear-contextual";
        case SettingKind::nonlinear_contextual: return "nonlinear-contextual";
    }
    throw std::logic_error("unknown SettingKind");
}

SettingKind setting_kind_from_string(const std::string& s) {
    if (s == "linear") return SettingKind::linear;
    if (s == "linear-contextual") return SettingKind::linear_contextual;
    if (s == "nonlinear-contextual") return SettingKind::nonlinear_contextual;
    throw std::invalid_argument("unknown setting kind: " + s);
}

double ProblemInstance::sigma2() const {
    double s = sigma_v2;
    if (coupled)
        for (double v : sigma_w2) s += v;
    return s;
}

double ProblemInstance::true_rho2() const {
    if (!coupled) return 0.0;
    double sw = 0.0;
    for (double v : sigma_w2) sw += v;
    const double total = sigma_v2 + sw;
    return total > 0.0 ? sw / total : 0.0;
}

namespace {

// Entries uniform in (0,1), then normalized to unit norm.
Vector unit_norm_theta(Rng& rng, int dim) {
    Vector theta(dim);
    for (double& v : theta) v = rng.uniform();
    const double n = norm2(theta);
    for (double& v : theta) v /= n;
    return theta;
}

// Split theta over q+1 disjoint supports: bucket 0 is theta_v, bucket i>0 is
// theta_w[i-1]. For q=1 this is the A.5 alternating split.
void split_supports(const Vector& theta, int q, Vector& theta_v, std::vector<Vector>& theta_w) {
    const int dim = static_cast<int>(theta.size());
    theta_v.assign(dim, 0.0);
    theta_w.assign(q, Vector(dim, 0.0));
    for (int j = 0; j < dim; ++j) {
        // A.5 puts the even (1-based) coordinates into theta_v
        const int bucket = (j + 1) % (q + 1);
        if (bucket == 0)
            theta_v[j] = theta[j];
        else
            theta_w[bucket - 1][j] = theta[j];
    }
}

}  // namespace

ProblemInstance make_linear_instance(uint64_t seed, int dim, double sigma_v2, double sigma_w2,
                                     int num_actions) {
    return make_multi_aux_linear_instance(seed, dim, 1, sigma_v2, {sigma_w2}, num_actions);
}

ProblemInstance make_multi_aux_linear_instance(uint64_t seed, int dim, int q, double sigma_v2,
                                               const std::vector<double>& sigma_w2,
                                               int num_actions) {
    if (num_actions < 2) throw std::invalid_argument("num_actions must be >= 2");
    if (q < 1 || static_cast<int>(sigma_w2.size()) != q)
        throw std::invalid_argument("sigma_w2 must have q entries");
    if (sigma_v2 < 0.0) throw std::invalid_argument("sigma_v2 must be >= 0");
    for (double v : sigma_w2)
        if (v < 0.0) throw std::invalid_argument("sigma_w2 entries must be >= 0");

    Rng rng(seed);
    ProblemInstance inst;
    inst.kind = SettingKind::linear;
    inst.dim = dim;
    inst.seed = seed;
    inst.sigma_v2 = sigma_v2;
    inst.sigma_w2 = sigma_w2;
    inst.action_bound = 2.236;
    inst.s_bound = 1.0;
    inst.lambda = 0.01;
    inst.delta = 0.05;
    inst.theta_star = unit_norm_theta(rng, dim);
    split_supports(inst.theta_star, q, inst.theta_v, inst.theta_w);
    inst.actions.resize(num_actions);
    for (auto& a : inst.actions) {
        a.resize(dim);
        for (double& v : a) v = rng.uniform(-3.0, 3.0);
    }
    return inst;
}

ProblemInstance make_linear_contextual_instance(uint64_t seed, double sigma_v2, double sigma_w2) {
    Rng rng(seed);
    ProblemInstance inst;
    inst.kind = SettingKind::linear_contextual;
    inst.dim = 2;
    inst.seed = seed;
    inst.sigma_v2 = sigma_v2;
    inst.sigma_w2 = {sigma_w2};
    inst.action_bound = 1.41;
    inst.s_bound = 1.0;
    inst.lambda = 0.01;
    inst.delta = 0.05;
    inst.theta_star = unit_norm_theta(rng, 2);
    split_supports(inst.theta_star, 1, inst.theta_v, inst.theta_w);
    return inst;
}

ProblemInstance make_nonlinear_contextual_instance(uint64_t seed, double sigma_v2,
                                                   double sigma_w2) {
    Rng rng(seed);
    ProblemInstance inst;
    inst.kind = SettingKind::nonlinear_contextual;
    inst.dim = 4;
    inst.seed = seed;
    inst.sigma_v2 = sigma_v2;
    inst.sigma_w2 = {sigma_w2};
    inst.action_bound = 2.0;
    inst.s_bound = 1.0;
    inst.lambda = 0.01;
    inst.delta = 0.05;
    inst.theta_star = unit_norm_theta(rng, 4);
    split_supports(inst.theta_star, 1, inst.theta_v, inst.theta_w);
    return inst;
}

ProblemInstance make_uncorrelated_linear_instance(uint64_t seed, int dim, double sigma_y2,
                                                  double sigma_w2, int num_actions) {
    ProblemInstance inst = make_multi_aux_linear_instance(seed, dim, 1, sigma_y2, {sigma_w2},
                                                          num_actions);
    inst.coupled = false;
    return inst;
}

double mean_reward(const ProblemInstance& instance, const Vector& x) {
    return dot(x, instance.theta_star);
}

double aux_mean(const ProblemInstance& instance, int feedback, const Vector& x) {
    return dot(x, instance.theta_w.at(feedback));
}

Vector sample_raw_context(const ProblemInstance& instance, Rng& rng) {
    if (instance.kind == SettingKind::linear)
        throw std::logic_error("linear instances have no contexts");
    Vector raw(2);
    raw[0] = rng.uniform(-1.0, 1.0);
    raw[1] = rng.uniform(-1.0, 1.0);
    return raw;
}

ActionSet actions_for_context(const ProblemInstance& instance, const Vector& raw) {
    ActionSet set;
    const double x1 = raw.at(0);
    const double x2 = raw.at(1);
    if (instance.kind == SettingKind::linear_contextual) {
        set.actions = {{x1, x2}, {x1, -x2}, {-x1, x2}, {-x1, -x2}};
    } else if (instance.kind == SettingKind::nonlinear_contextual) {
        const double b1 = x1, b2 = x2, b3 = x1 * x1, b4 = x1 * x2;
        // sign patterns from A.5, in the printed order
        set.actions = {{b1, b2, -b3, -b4}, {b1, -b2, b3, -b4}, {-b1, b2, b3, -b4},
                       {b1, -b2, -b3, b4}, {-b1, b2, -b3, b4}, {-b1, -b2, b3, b4}};
    } else {
        throw std::logic_error("linear instances have no contexts");
    }
    return set;
}

ActionSet round_actions(const ProblemInstance& instance, Rng& ctx_rng) {
    if (instance.kind == SettingKind::linear) return ActionSet{instance.actions};
    return actions_for_context(instance, sample_raw_context(instance, ctx_rng));
}

RoundFeedback pull(const ProblemInstance& instance, Rng& rng, const Vector& x) {
    RoundFeedback fb;
    const int q = instance.q();
    fb.aux.resize(q);
    const double eps_v = rng.gaussian(0.0, instance.sigma_v2);
    if (instance.coupled) {
        fb.reward = dot(x, instance.theta_v) + eps_v;
        for (int i = 0; i < q; ++i) {
            const double w = aux_mean(instance, i, x) + rng.gaussian(0.0, instance.sigma_w2[i]);
            fb.aux[i] = w;
            fb.reward += w;  // the same epsilon_w draw enters the reward
        }
    } else {
        fb.reward = mean_reward(instance, x) + eps_v;
        for (int i = 0; i < q; ++i)
            fb.aux[i] = aux_mean(instance, i, x) + rng.gaussian(0.0, instance.sigma_w2[i]);
    }
    return fb;
}

Vector sample_aux_only(const ProblemInstance& instance, Rng& rng, const Vector& x) {
    const int q = instance.q();
    Vector w(q);
    for (int i = 0; i < q; ++i)
        w[i] = aux_mean(instance, i, x) + rng.gaussian(0.0, instance.sigma_w2[i]);
    return w;
}

double instantaneous_regret(const ProblemInstance& instance, const ActionSet& actions,
                            const Vector& chosen) {
    if (actions.actions.empty()) throw std::invalid_argument("empty action set");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : actions.actions) best = std::max(best, mean_reward(instance, a));
    return std::max(0.0, best - mean_reward(instance, chosen));
}

int true_argmax(const ProblemInstance& instance, const ActionSet& actions) {
    if (actions.actions.empty()) throw std::invalid_argument("empty action set");
    int best = 0;
    double best_val = mean_reward(instance, actions.actions[0]);
    for (int i = 1; i < static_cast<int>(actions.actions.size()); ++i) {
        const double v = mean_reward(instance, actions.actions[i]);
        if (v > best_val) {
            best = i;
            best_val = v;
        }
    }
    return best;
}

std::string instance_to_json(const ProblemInstance& inst) {
    nlohmann::json j;
    j["kind"] = to_string(inst.kind);
    j["d"] = inst.dim;
    j["theta_star"] = inst.theta_star;
    j["theta_v"] = inst.theta_v;
    j["theta_w"] = inst.theta_w;
    j["sigma_v2"] = inst.sigma_v2;
    j["sigma_w2"] = inst.sigma_w2;
    j["L"] = inst.action_bound;
    j["S"] = inst.s_bound;
    j["lambda"] = inst.lambda;
    j["delta"] = inst.delta;
    j["coupled"] = inst.coupled;
    j["seed"] = inst.seed;
    if (inst.kind == SettingKind::linear) {
        j["actions"] = inst.actions;
    } else {
        j["context_spec"] = {{"raw_dim", 2},
                             {"transform", inst.kind == SettingKind::linear_contextual
                                               ? "sign-flips"
                                               : "poly2-sign-patterns"}};
    }
    return j.dump(2);
}

ProblemInstance instance_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ProblemInstance inst;
    inst.kind = setting_kind_from_string(j.at("kind").get<std::string>());
    inst.dim = j.at("d").get<int>();
    inst.theta_star = j.at("theta_star").get<Vector>();
    inst.theta_v = j.at("theta_v").get<Vector>();
    inst.theta_w = j.at("theta_w").get<std::vector<Vector>>();
    inst.sigma_v2 = j.at("sigma_v2").get<double>();
    inst.sigma_w2 = j.at("sigma_w2").get<std::vector<double>>();
    inst.action_bound = j.at("L").get<double>();
    inst.s_bound = j.at("S").get<double>();
    inst.lambda = j.at("lambda").get<double>();
    inst.delta = j.at("delta").get<double>();
    inst.coupled = j.at("coupled").get<bool>();
    inst.seed = j.at("seed").get<uint64_t>();
    if (j.contains("actions")) inst.actions = j.at("actions").get<std::vector<Vector>>();
    return inst;
}

}  // namespace banditcv
