#include "verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "banditcv/algorithms.hpp"
#include "banditcv/control_variates.hpp"
#include "banditcv/environments.hpp"

namespace banditcv::cli {

namespace {

std::string format(const char* pattern, double a, double b, double c) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

struct Accumulator {
    double sum = 0.0, sumsq = 0.0;
    long n = 0;
    void add(double v) {
        sum += v;
        sumsq += v * v;
        n += 1;
    }
    double mean() const { return sum / n; }
    double variance() const { return (sumsq - sum * sum / n) / (n - 1); }
};

ProblemInstance half_correlated_instance(uint64_t seed, int q) {
    // sigma^2 = 0.02 and rho^2 = 0.5 for any q
    const std::vector<double> sw(q, 0.01 / q);
    return make_multi_aux_linear_instance(seed, 5, q, 0.01, sw, 100);
}

std::vector<Vector> fixed_action_sequence(const ProblemInstance& instance, uint64_t seed, int t) {
    Rng rng(seed);
    std::vector<Vector> xs(t);
    for (auto& x : xs) x = instance.actions[rng.next_u64() % instance.actions.size()];
    return xs;
}

Vector true_g(const ProblemInstance& instance, const Vector& x) {
    Vector g(instance.q());
    for (int i = 0; i < instance.q(); ++i) g[i] = aux_mean(instance, i, x);
    return g;
}

// Theorem-1 law: fixed action sequence, leave-one-out beta fit, true-f
// residuals. The fault hook keeps the probe inside the fit, which is the
// degrees-of-freedom bug this check must be able to catch.
CheckResult theorem1_variance(int q, long redraws, double tol, bool fault, uint64_t seed) {
    const int t = 50;
    const int probe = 25;
    const ProblemInstance instance = half_correlated_instance(seed, q);
    const auto xs = fixed_action_sequence(instance, seed + 1, t);
    const double sigma2 = instance.sigma2();
    const double rho2 = instance.true_rho2();

    Rng rng(seed + 2);
    Accumulator z_acc;
    for (long it = 0; it < redraws; ++it) {
        ObservationLog log(instance.dim, q);
        double probe_y = 0.0;
        Vector probe_w;
        for (int j = 0; j < t; ++j) {
            const RoundFeedback fb = pull(instance, rng, xs[j]);
            if (j == probe) {
                probe_y = fb.reward;
                probe_w = fb.aux;
                if (!fault) continue;
            }
            log.append(xs[j], fb.reward, fb.aux, true_g(instance, xs[j]));
        }
        const Vector beta = estimate_beta(log, instance.theta_star);
        z_acc.add(hybrid_reward(probe_y, probe_w, true_g(instance, xs[probe]), beta));
    }

    const double target = (1.0 + static_cast<double>(q) / (t - q - 2)) * (1.0 - rho2) * sigma2;
    const double rel = std::abs(z_acc.variance() / target - 1.0);
    CheckResult result;
    result.name = "theorem1-variance-q" + std::to_string(q);
    result.pass = rel < tol;
    result.detail = format("mc_var=%.6g target=%.6g rel_err=%.3f", z_acc.variance(), target, rel);
    return result;
}

CheckResult theorem1_unbiasedness(int q, long redraws, bool fault, uint64_t seed) {
    const int t = 50;
    const ProblemInstance instance = half_correlated_instance(seed, q);
    const auto xs = fixed_action_sequence(instance, seed + 1, t);
    std::vector<int> probes;
    for (int p = 2; p < t; p += 5) probes.push_back(p);  // 10 probe actions
    std::vector<bool> is_probe(t, false);
    for (int p : probes) is_probe[p] = true;

    Rng rng(seed + 3);
    std::vector<Accumulator> acc(probes.size());
    for (long it = 0; it < redraws; ++it) {
        ObservationLog log(instance.dim, q);
        std::vector<double> ys(t);
        std::vector<Vector> ws(t);
        for (int j = 0; j < t; ++j) {
            const RoundFeedback fb = pull(instance, rng, xs[j]);
            ys[j] = fb.reward;
            ws[j] = fb.aux;
            if (!is_probe[j] || fault)
                log.append(xs[j], fb.reward, fb.aux, true_g(instance, xs[j]));
        }
        const Vector beta = estimate_beta(log, instance.theta_star);
        for (size_t k = 0; k < probes.size(); ++k)
            acc[k].add(hybrid_reward(ys[probes[k]], ws[probes[k]], true_g(instance, xs[probes[k]]),
                                     beta));
    }

    double worst = 0.0;
    bool pass = true;
    for (size_t k = 0; k < probes.size(); ++k) {
        const double f = mean_reward(instance, xs[probes[k]]);
        const double se = std::sqrt(acc[k].variance() / acc[k].n);
        const double dev = std::abs(acc[k].mean() - f) / se;
        worst = std::max(worst, dev);
        if (dev >= 3.0) pass = false;
    }
    CheckResult result;
    result.name = "theorem1-unbiasedness-q" + std::to_string(q);
    result.pass = pass;
    result.detail = format("max |mean-f|/se over %g probes = %.3f (limit 3)",
                           static_cast<double>(probes.size()), worst, 0.0);
    return result;
}

CheckResult theorem3_variance(int q, SamplingStrategy strategy, long redraws, double tol,
                              uint64_t seed) {
    const int t = 50;
    const int probe = 25;
    const double ratio = 2.0;
    const ProblemInstance instance = half_correlated_instance(seed, q);
    const auto xs = fixed_action_sequence(instance, seed + 1, t);
    const double sigma2 = instance.sigma2();

    const Matrix f_e = f_matrix(std::vector<double>(q, ratio), strategy);
    CovarianceSpec cov;
    cov.sigma_ww = Matrix(q, q);
    cov.sigma_yw.resize(q);
    for (int i = 0; i < q; ++i) {
        cov.sigma_ww(i, i) = instance.sigma_w2[i];
        cov.sigma_yw[i] = instance.sigma_w2[i];
    }
    const double rho_e2 = rho_e_squared(cov, f_e, sigma2);
    const double a = strategy == SamplingStrategy::mf ? (ratio - 1.0) / ratio : 1.0;
    const double target =
        (1.0 + a * static_cast<double>(q) / (t - q - 2)) * (1.0 - rho_e2) * sigma2;

    Rng rng(seed + 4);
    Accumulator z_acc;
    for (long it = 0; it < redraws; ++it) {
        ObservationLog log(instance.dim, q);
        double probe_y = 0.0;
        Vector probe_w, probe_g;
        for (int j = 0; j < t; ++j) {
            const RoundFeedback fb = pull(instance, rng, xs[j]);
            Vector g_hat(q);
            if (strategy == SamplingStrategy::mf) {
                // one shared extra sample event per round
                const Vector extra = sample_aux_only(instance, rng, xs[j]);
                for (int i = 0; i < q; ++i) g_hat[i] = 0.5 * (fb.aux[i] + extra[i]);
            } else {
                // per-feedback independent extra events
                for (int i = 0; i < q; ++i) {
                    const Vector extra = sample_aux_only(instance, rng, xs[j]);
                    g_hat[i] = 0.5 * (fb.aux[i] + extra[i]);
                }
            }
            if (j == probe) {
                probe_y = fb.reward;
                probe_w = fb.aux;
                probe_g = g_hat;
                continue;
            }
            log.append(xs[j], fb.reward, fb.aux, g_hat);
        }
        const Vector beta = estimate_beta_approx(log, instance.theta_star, f_e);
        z_acc.add(hybrid_reward(probe_y, probe_w, probe_g, beta));
    }

    const double rel = std::abs(z_acc.variance() / target - 1.0);
    CheckResult result;
    result.name = std::string("theorem3-variance-") +
                  (strategy == SamplingStrategy::is ? "is" : "mf") + "-q" + std::to_string(q);
    result.pass = rel < tol;
    result.detail = format("mc_var=%.6g target=%.6g rel_err=%.3f", z_acc.variance(), target, rel);
    return result;
}

CheckResult remark1_limit(int q) {
    CovarianceSpec cov;
    cov.sigma_ww = Matrix(q, q);
    cov.sigma_yw.resize(q);
    const double sigma2 = 0.02;
    for (int i = 0; i < q; ++i) {
        cov.sigma_ww(i, i) = 0.01 / q;
        cov.sigma_yw[i] = 0.01 / q;
    }
    const double rho2 = 0.5;
    const std::vector<double> grid = {2.0, 4.0, 16.0, 256.0, 1e6};
    double prev = -1.0;
    bool monotone = true;
    double final_gap = 0.0;
    for (size_t k = 0; k < grid.size(); ++k) {
        for (SamplingStrategy st : {SamplingStrategy::is, SamplingStrategy::mf}) {
            const double r2 =
                rho_e_squared(cov, f_matrix(std::vector<double>(q, grid[k]), st), sigma2);
            if (st == SamplingStrategy::is) {
                if (r2 < prev - 1e-15) monotone = false;
                prev = r2;
                if (k + 1 == grid.size()) final_gap = std::abs(r2 - rho2);
            }
        }
    }
    CheckResult result;
    result.name = "remark1-fe-limit-q" + std::to_string(q);
    result.pass = monotone && final_gap < 1e-5;
    result.detail = format("monotone=%g |rho_e2-rho2|@r=1e6 = %.3g (limit 1e-5)",
                           monotone ? 1.0 : 0.0, final_gap, 0.0);
    return result;
}

CheckResult lemma2_collapse(uint64_t seed) {
    Rng rng(seed);
    const int t = 30, q = 3, d = 4;
    ObservationLog log(d, q);
    Vector theta(d);
    for (double& v : theta) v = rng.uniform(-1.0, 1.0);
    for (int s = 0; s < t; ++s) {
        Vector x(d), w(q), g(q, 0.0);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        for (double& v : w) v = rng.gaussian(0.0, 1.0);
        log.append(x, rng.gaussian(0.0, 1.0), w, g);
    }
    Matrix ones(q, q);
    for (double& v : ones.data) v = 1.0;
    const Vector beta_exact = estimate_beta(log, theta);
    const Vector beta_ones = estimate_beta_approx(log, theta, ones);
    double worst = 0.0;
    for (int i = 0; i < q; ++i) worst = std::max(worst, std::abs(beta_exact[i] - beta_ones[i]));

    // q = 1: the scalar (r-1)/r cancels for any r
    ObservationLog log1(d, 1);
    for (int s = 0; s < t; ++s) {
        Vector x(d);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        log1.append(x, rng.gaussian(0.0, 1.0), {rng.gaussian(0.0, 1.0)}, {0.0});
    }
    const Vector b1 = estimate_beta(log1, theta);
    const Vector b2 = estimate_beta_approx(log1, theta, f_matrix({7.0}, SamplingStrategy::is));
    const double scalar_gap = std::abs(b1[0] - b2[0]) / std::max(1.0, std::abs(b1[0]));

    CheckResult result;
    result.name = "lemma2-collapses-to-lemma1";
    result.pass = worst <= 1e-12 && scalar_gap <= 1e-12;
    result.detail = format("all-ones gap=%.3g scalar-cancel gap=%.3g (limit 1e-12)", worst,
                           scalar_gap, 0.0);
    return result;
}

CheckResult numeric_invariants(uint64_t seed) {
    Rng rng(seed);
    bool pass = true;
    std::string why = "ok";

    // SPD solve residual on random M^T M + I systems up to 20x20
    for (int n : {3, 8, 20}) {
        Matrix m(n, n);
        for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
        Matrix a = transpose(m) * m;
        for (int i = 0; i < n; ++i) a(i, i) += 1.0;
        Vector b(n);
        for (double& v : b) v = rng.uniform(-1.0, 1.0);
        const Vector x = solve_spd(a, b);
        const Vector ax = mat_vec(a, x);
        double rnorm = 0.0;
        for (int i = 0; i < n; ++i) rnorm += (ax[i] - b[i]) * (ax[i] - b[i]);
        if (std::sqrt(rnorm) > 1e-8 * norm2(b)) {
            pass = false;
            why = "solve_spd residual too large";
        }
    }
    // chi2 monotone in p and dof
    double prev = 0.0;
    for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        const double v = chi2_quantile(p, 10);
        if (v <= prev) {
            pass = false;
            why = "chi2 not increasing in p";
        }
        prev = v;
    }
    prev = 0.0;
    for (int dof : {1, 2, 5, 20, 100}) {
        const double v = chi2_quantile(0.9, dof);
        if (v <= prev) {
            pass = false;
            why = "chi2 not increasing in dof";
        }
        prev = v;
    }
    CheckResult result;
    result.name = "numeric-invariants";
    result.pass = pass;
    result.detail = why;
    return result;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
    const long redraws = options.quick ? 4000 : 20000;
    const double tol1 = options.quick ? 0.10 : 0.05;
    const double tol3 = options.quick ? 0.14 : 0.07;

    std::vector<CheckResult> results;
    results.push_back(numeric_invariants(options.seed));
    results.push_back(lemma2_collapse(options.seed + 10));
    results.push_back(remark1_limit(1));
    results.push_back(remark1_limit(2));
    for (int q : {1, 3}) {
        results.push_back(
            theorem1_variance(q, redraws, tol1, options.fault_beta_dof, options.seed + q));
        results.push_back(
            theorem1_unbiasedness(q, redraws / 2, options.fault_beta_dof, options.seed + 20 + q));
    }
    for (int q : {1, 2}) {
        results.push_back(
            theorem3_variance(q, SamplingStrategy::is, redraws, tol3, options.seed + 30 + q));
        results.push_back(
            theorem3_variance(q, SamplingStrategy::mf, redraws, tol3, options.seed + 40 + q));
    }
    return results;
}

}  // namespace banditcv::cli
