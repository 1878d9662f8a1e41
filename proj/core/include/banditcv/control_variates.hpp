#pragma once

#include <vector>

#include "banditcv/numerics.hpp"

namespace banditcv {

enum class SamplingStrategy { exact, is, mf };

/// Per-round observations plus the running aggregates that make every refresh
/// O(dq + q^3) instead of a pass over the history. Centered feedback values
/// are fixed at append time (the active aux model never rewrites history).
struct ObservationLog {
    struct Record {
        Vector x;
        double y = 0.0;
        Vector w;
        Vector w_centered;  // w - g_hat(x)
    };

    int dim = 0;
    int q = 0;
    std::vector<Record> records;

    Matrix wtw;        // q x q: sum of w_c w_c^T
    Vector sum_xy;     // d: sum of x y
    Matrix sum_x_wc;   // d x q: sum of x w_c^T
    Vector sum_wc_y;   // q: sum of w_c y
    Vector sum_wc;     // q
    Vector sum_x;      // d
    double sum_y = 0.0;

    ObservationLog() = default;
    ObservationLog(int dim_, int q_);

    void append(const Vector& x, double y, const Vector& w, const Vector& g_hat);
    int t() const { return static_cast<int>(records.size()); }
};

enum class AuxKind { known, biased, estimated_history, sampled };

/// Mean model for the auxiliary feedback. `sampled` models have no functional
/// form: IS/MF center each round with the local mean of that round's draws.
struct AuxModel {
    AuxKind kind = AuxKind::known;
    double bias = 0.0;               // biased models: offset magnitude epsilon_g
    std::vector<Vector> g_params;    // known: true theta_w; biased: offset theta_w;
                                     // history: ridge fit

    // g_hat values at x, length q; throws for sampled models
    Vector values(const Vector& x) const;
};

struct HybridState {
    Vector beta;             // q entries, all zero when inactive
    Matrix f_e;              // all-ones for exact models
    double a_factor = 1.0;   // 1 for exact/IS, (r-1)/r for MF
    double nu_hat = 0.0;
    double nu_bar = 0.0;
    bool active = false;
};

struct CovarianceSpec {
    Matrix sigma_ww;  // q x q, SPD
    Vector sigma_yw;  // q
};

struct RefreshOptions {
    SamplingStrategy strategy = SamplingStrategy::exact;
    std::vector<double> ratios;  // per-feedback, IS/MF only
    int dof_offset = 2;          // chi-squared dof = t - dof_offset
    // Optional precomputed gate ratios dof/chi2_quantile(delta, dof), indexed
    // by t; must have been built with the same delta and dof_offset.
    const std::vector<double>* gate_ratio_by_t = nullptr;
};

// z = y - sum_i beta_i (w_i - g_i)
double hybrid_reward(double y, const Vector& w, const Vector& g_hat, const Vector& beta);

// Best linear unbiased estimator (W^T W)^{-1} W^T Y with Y_s = y_s - x_s^T theta_hat,
// computed from the log aggregates. Throws SingularGram on a Cholesky pivot < 1e-12.
Vector estimate_beta(const ObservationLog& log, const Vector& theta_hat);

// beta* = Sigma_ww^{-1} sigma_yw
Vector estimate_beta_known_cov(const CovarianceSpec& spec);

// Sample-overlap factors: diagonal (r_i-1)/r_i; IS off-diagonal
// (r_i-1)(r_j-1)/(r_i r_j); MF off-diagonal (min(r_i,r_j)-1)/min(r_i,r_j).
Matrix f_matrix(const std::vector<double>& ratios, SamplingStrategy strategy);

// (W^T W o F_e)^{-1} (diag(F_e) o W^T Y)
Vector estimate_beta_approx(const ObservationLog& log, const Vector& theta_hat,
                            const Matrix& f_e);

struct RegressionVariance {
    double nu_hat = 0.0;  // sigma_hat^2 * (Wbar^T Wbar)^{-1}_{11}
    double mu_hat = 0.0;  // fitted intercept
};

// Regression-based estimator over [1 | W]; unbiased for Var(mu_hat_z) under a
// constant-mean log. Exposed for analysis, not on the algorithm path.
RegressionVariance sample_variance_regression(const ObservationLog& log);

// Known-sigma estimator: rho_hat from mean-centered sample covariances of the
// reward residual against the centered feedback, nu_hat = (1 - rho_hat^2) sigma^2
// clamped to [0, sigma^2]; degenerate feedback returns sigma^2.
double sample_variance_known_sigma(const ObservationLog& log, double sigma2,
                                   const Vector& theta_hat);

// (t-2) nu_hat / chi2_quantile(1-delta, t-2)
double variance_upper_bound(double nu_hat, int t, double delta);

// rho_e^2 = (diag(F) o sigma_yw)^T (Sigma_ww o F)^{-1} (diag(F) o sigma_yw) / sigma^2
double rho_e_squared(const CovarianceSpec& spec, const Matrix& f_e, double sigma2);

// Greedy pick by |sample (partial) correlation|, stopping when the
// (1 + k/(t-k-2))(1 - rho_sel^2) sigma^2 proxy stops decreasing.
std::vector<int> select_feedback_subset(const ObservationLog& log, double sigma2,
                                        const Vector& theta_hat);

// sum_s x_s z_s = sum_s x_s y_s - (sum_s x_s w_c^T) beta
Vector hybrid_reward_aggregate(const ObservationLog& log, const Vector& beta);

HybridState refresh(const ObservationLog& log, const Vector& theta_hat, double sigma2,
                    double delta, const RefreshOptions& opts = {});

}  // namespace banditcv
