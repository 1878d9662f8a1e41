#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "banditcv/control_variates.hpp"
#include "banditcv/environments.hpp"
#include "banditcv/numerics.hpp"

namespace banditcv {

enum class Variant { vanilla, af, is, mf, be, eh };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct VariantConfig {
    Variant variant = Variant::vanilla;
    double bias = 0.05;           // BE: auxiliary parameter offset of this norm
    int history_size = 200;      // EH
    double ratio = 2.0;           // IS/MF samples-per-round ratio (integer >= 2)
    bool extra_at_chosen = true;  // IS/MF extra draw at chosen vs random action
    int dof_offset = 2;           // chi-squared dof = t - dof_offset
    double history_ridge = 1e-6;  // EH ridge penalty
};

// alpha_t = sqrt(d log((1 + t L^2 / lambda) / delta)); strictly increasing in t.
double confidence_width(int t, int d, double action_bound, double lambda, double delta);

// Precomputed gate ratios dof / chi2_quantile(delta, dof) indexed by t, so the
// per-round bound costs one lookup. Entry 0..t_max.
std::vector<double> build_gate_table(int t_max, double delta, int dof_offset);

/// Ridge-with-confidence-ellipsoid learner over whatever feature vectors the
/// environment hands it (the polynomial map for NLin-UCB is applied
/// environment-side). Hybrid machinery is dormant for the vanilla variant.
struct AfcLearner {
    int dim = 0;
    double lambda = 0.01;
    double action_bound = 1.0;  // L
    double s_bound = 1.0;       // S
    double delta = 0.05;
    double sigma2 = 0.02;

    VariantConfig config;
    AuxModel aux;

    Matrix v_bar;       // lambda I + sum phi phi^T
    Vector theta_hat;   // theta^z
    ObservationLog log;
    HybridState hybrid;
    int round = 1;

    std::shared_ptr<const std::vector<double>> gate_table;  // optional speed-up

    double scale() const;  // sqrt(min(sigma^2, nu_bar))
};

struct HistorySample {
    Vector x;
    Vector w;
};

// n_h auxiliary-only observations at points from the instance's natural domain.
std::vector<HistorySample> draw_history(const ProblemInstance& instance, Rng& rng, int n_h);

// Per-feedback ridge fit (X^T X + lambda_g I)^{-1} X^T w, frozen thereafter.
AuxModel fit_history_model(const std::vector<HistorySample>& samples, double lambda_g);

AfcLearner make_learner(const ProblemInstance& instance, const VariantConfig& config,
                        Rng& history_rng);

// Refresh the hybrid state from the log and re-solve theta_hat; call at the
// top of each round before selecting.
void begin_round(AfcLearner& learner);

// argmax of x^T theta + sqrt(min(sigma^2, nu_bar)) alpha_t ||x||_{Vbar^-1},
// ties to the lowest index.
int select_action(const AfcLearner& learner, const ActionSet& actions);

// Log the observation, grow Vbar, re-solve theta_hat with the current beta.
void update(AfcLearner& learner, const Vector& x, double y, const Vector& w,
            const Vector& g_hat);
// Raw-reward overload for q = 0 logs.
void update(AfcLearner& learner, const Vector& x, double z);

struct ConfidenceBound {
    double h_term = 0.0;  // alpha_t ||x||_{Vbar^-1}
    double l_term = 0.0;  // lambda^{1/2} S ||x||_{Vbar^-1}
    double scale = 0.0;   // sqrt(min(sigma^2, nu_bar))
};

ConfidenceBound confidence_bound(const AfcLearner& learner, const Vector& x);

struct StepResult {
    int action_index = -1;
    RoundFeedback feedback;
    double regret = 0.0;
};

// One full round: refresh, select, pull, (optional extra aux draw), log, update.
StepResult step(AfcLearner& learner, const ProblemInstance& instance, const ActionSet& actions,
                Rng& noise_rng, Rng& extra_rng);

}  // namespace banditcv
