#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banditcv/numerics.hpp"

namespace banditcv {

enum class SettingKind { linear, linear_contextual, nonlinear_contextual };

std::string to_string(SettingKind kind);
SettingKind setting_kind_from_string(const std::string& s);

/// Synthetic environment: reward parameter split into a "reward-only" part and
/// per-feedback auxiliary parts with disjoint supports. With coupled noise the
/// auxiliary noise re-appears inside the reward, which is what produces
/// rho = sqrt(sigma_w^2 / (sigma_v^2 + sigma_w^2)).
struct ProblemInstance {
    SettingKind kind = SettingKind::linear;
    int dim = 0;
    Vector theta_star;                // theta_v + sum_i theta_w[i]
    Vector theta_v;
    std::vector<Vector> theta_w;      // q auxiliary parameter vectors
    double sigma_v2 = 0.0;
    std::vector<double> sigma_w2;     // per-feedback noise variance
    double action_bound = 0.0;        // L, as used by the confidence width
    double s_bound = 1.0;             // S
    double lambda = 0.01;
    double delta = 0.05;
    bool coupled = true;              // false: reward noise independent of aux noise
    std::vector<Vector> actions;      // fixed action set (linear setting only)
    uint64_t seed = 0;

    int q() const { return static_cast<int>(theta_w.size()); }
    double sigma2() const;            // reward noise variance
    double true_rho2() const;         // multiple correlation, closed form
};

struct ActionSet {
    std::vector<Vector> actions;
};

struct RoundFeedback {
    double reward = 0.0;
    Vector aux;
};

// A.5 linear-bandit instance: d-dim box (-3,3), K actions sampled once,
// unit-norm theta with the alternating support split.
ProblemInstance make_linear_instance(uint64_t seed, int dim = 5, double sigma_v2 = 0.01,
                                     double sigma_w2 = 0.01, int num_actions = 100);

// q > 1 generalization with independent per-feedback noises; supports assigned
// round-robin over (v, w_1, ..., w_q).
ProblemInstance make_multi_aux_linear_instance(uint64_t seed, int dim, int q, double sigma_v2,
                                               const std::vector<double>& sigma_w2,
                                               int num_actions = 100);

// 2-dim contexts in (-1,1)^2, four sign-flip actions per round.
ProblemInstance make_linear_contextual_instance(uint64_t seed, double sigma_v2 = 0.01,
                                                double sigma_w2 = 0.01);

// degree-2 feature map (x1, x2, x1^2, x1*x2), six sign-pattern actions.
ProblemInstance make_nonlinear_contextual_instance(uint64_t seed, double sigma_v2 = 0.01,
                                                   double sigma_w2 = 0.01);

// rho = 0: reward noise drawn independently of the auxiliary noise.
ProblemInstance make_uncorrelated_linear_instance(uint64_t seed, int dim = 5,
                                                  double sigma_y2 = 0.02, double sigma_w2 = 0.01,
                                                  int num_actions = 100);

double mean_reward(const ProblemInstance& instance, const Vector& x);
double aux_mean(const ProblemInstance& instance, int feedback, const Vector& x);

Vector sample_raw_context(const ProblemInstance& instance, Rng& rng);
ActionSet actions_for_context(const ProblemInstance& instance, const Vector& raw_context);

// Per-round action set: the fixed set for linear instances, a fresh
// context-derived set otherwise.
ActionSet round_actions(const ProblemInstance& instance, Rng& ctx_rng);

// One environment interaction. Coupled instances reuse the same epsilon_w draw
// inside reward and feedback; draw order is epsilon_v first, then feedbacks.
RoundFeedback pull(const ProblemInstance& instance, Rng& rng, const Vector& x);

// Fresh independent auxiliary draw (no reward), one value per feedback.
Vector sample_aux_only(const ProblemInstance& instance, Rng& rng, const Vector& x);

double instantaneous_regret(const ProblemInstance& instance, const ActionSet& actions,
                            const Vector& chosen);

// Index of the noiseless-best action, lowest index on ties.
int true_argmax(const ProblemInstance& instance, const ActionSet& actions);

std::string instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const std::string& text);

}  // namespace banditcv
