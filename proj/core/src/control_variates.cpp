#include "banditcv/control_variates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace banditcv {

namespace {

constexpr double kGramPivot = 1e-12;

}  // namespace

ObservationLog::ObservationLog(int dim_, int q_)
    : dim(dim_),
      q(q_),
      wtw(q_, q_),
      sum_xy(dim_, 0.0),
      sum_x_wc(dim_, q_),
      sum_wc_y(q_, 0.0),
      sum_wc(q_, 0.0),
      sum_x(dim_, 0.0) {
    if (dim_ < 1 || q_ < 0) throw std::invalid_argument("ObservationLog: bad dimensions");
}

void ObservationLog::append(const Vector& x, double y, const Vector& w, const Vector& g_hat) {
    if (static_cast<int>(x.size()) != dim || static_cast<int>(w.size()) != q ||
        static_cast<int>(g_hat.size()) != q)
        throw std::invalid_argument("ObservationLog::append dimension mismatch");
    Record rec;
    rec.x = x;
    rec.y = y;
    rec.w = w;
    rec.w_centered.resize(q);
    for (int i = 0; i < q; ++i) rec.w_centered[i] = w[i] - g_hat[i];

    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) wtw(i, j) += rec.w_centered[i] * rec.w_centered[j];
        sum_wc_y[i] += rec.w_centered[i] * y;
        sum_wc[i] += rec.w_centered[i];
    }
    for (int j = 0; j < dim; ++j) {
        sum_xy[j] += x[j] * y;
        sum_x[j] += x[j];
        for (int i = 0; i < q; ++i) sum_x_wc(j, i) += x[j] * rec.w_centered[i];
    }
    sum_y += y;
    records.push_back(std::move(rec));
}

Vector AuxModel::values(const Vector& x) const {
    if (kind == AuxKind::sampled)
        throw std::logic_error("sampled aux models have no mean function");
    Vector g(g_params.size());
    for (size_t i = 0; i < g_params.size(); ++i) g[i] = dot(x, g_params[i]);
    return g;
}

double hybrid_reward(double y, const Vector& w, const Vector& g_hat, const Vector& beta) {
    if (w.size() != g_hat.size() || w.size() != beta.size())
        throw std::invalid_argument("hybrid_reward length mismatch");
    double z = y;
    for (size_t i = 0; i < w.size(); ++i) z -= beta[i] * (w[i] - g_hat[i]);
    return z;
}

namespace {

// W^T Y with Y_s = y_s - x_s^T theta_hat, from aggregates
Vector wty_residual(const ObservationLog& log, const Vector& theta_hat) {
    Vector wty(log.q);
    for (int i = 0; i < log.q; ++i) {
        double s = log.sum_wc_y[i];
        for (int j = 0; j < log.dim; ++j) s -= log.sum_x_wc(j, i) * theta_hat[j];
        wty[i] = s;
    }
    return wty;
}

}  // namespace

Vector estimate_beta(const ObservationLog& log, const Vector& theta_hat) {
    if (log.t() <= log.q + 2)
        throw std::invalid_argument("estimate_beta requires t > q + 2");
    try {
        return CholeskyFactor::compute(log.wtw, kGramPivot).solve(wty_residual(log, theta_hat));
    } catch (const NotPositiveDefinite&) {
        throw SingularGram("degenerate auxiliary feedback: W^T W pivot below 1e-12");
    }
}

Vector estimate_beta_known_cov(const CovarianceSpec& spec) {
    return CholeskyFactor::compute(spec.sigma_ww).solve(spec.sigma_yw);
}

Matrix f_matrix(const std::vector<double>& ratios, SamplingStrategy strategy) {
    if (strategy == SamplingStrategy::exact)
        throw std::invalid_argument("f_matrix is defined for IS/MF strategies");
    const int q = static_cast<int>(ratios.size());
    for (double r : ratios)
        if (r < 1.0) throw std::invalid_argument("f_matrix: ratios must be >= 1");
    Matrix f(q, q);
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) {
            if (i == j) {
                f(i, j) = (ratios[i] - 1.0) / ratios[i];
            } else if (strategy == SamplingStrategy::is) {
                f(i, j) = (ratios[i] - 1.0) * (ratios[j] - 1.0) / (ratios[i] * ratios[j]);
            } else {
                const double m = std::min(ratios[i], ratios[j]);
                f(i, j) = (m - 1.0) / m;
            }
        }
    }
    return f;
}

Vector estimate_beta_approx(const ObservationLog& log, const Vector& theta_hat,
                            const Matrix& f_e) {
    if (log.t() <= log.q + 2)
        throw std::invalid_argument("estimate_beta_approx requires t > q + 2");
    if (f_e.rows != log.q || f_e.cols != log.q)
        throw std::invalid_argument("estimate_beta_approx: F_e shape mismatch");
    const Matrix gram = hadamard(log.wtw, f_e);
    Vector rhs = wty_residual(log, theta_hat);
    for (int i = 0; i < log.q; ++i) rhs[i] *= f_e(i, i);
    try {
        return CholeskyFactor::compute(gram, kGramPivot).solve(rhs);
    } catch (const NotPositiveDefinite&) {
        throw SingularGram("degenerate auxiliary feedback: (W^T W o F_e) pivot below 1e-12");
    }
}

RegressionVariance sample_variance_regression(const ObservationLog& log) {
    const int t = log.t();
    const int q = log.q;
    if (t <= q + 1) throw std::invalid_argument("sample_variance_regression requires t > q + 1");

    // Gram of [1 | W] from aggregates
    Matrix gram(q + 1, q + 1);
    gram(0, 0) = static_cast<double>(t);
    for (int i = 0; i < q; ++i) {
        gram(0, i + 1) = log.sum_wc[i];
        gram(i + 1, 0) = log.sum_wc[i];
        for (int j = 0; j < q; ++j) gram(i + 1, j + 1) = log.wtw(i, j);
    }
    Vector rhs(q + 1);
    rhs[0] = log.sum_y;
    for (int i = 0; i < q; ++i) rhs[i + 1] = log.sum_wc_y[i];

    CholeskyFactor factor = [&] {
        try {
            return CholeskyFactor::compute(gram, kGramPivot);
        } catch (const NotPositiveDefinite&) {
            throw SingularGram("sample_variance_regression: singular [1|W] Gram matrix");
        }
    }();
    const Vector gamma = factor.solve(rhs);

    double rss = 0.0;
    for (const auto& rec : log.records) {
        double fit = gamma[0];
        for (int i = 0; i < q; ++i) fit += gamma[i + 1] * rec.w_centered[i];
        const double r = rec.y - fit;
        rss += r * r;
    }
    const double sigma2_hat = rss / static_cast<double>(t - q - 1);

    Vector e1(q + 1, 0.0);
    e1[0] = 1.0;
    const double g11 = factor.solve(e1)[0];

    return RegressionVariance{std::max(0.0, sigma2_hat * g11), gamma[0]};
}

namespace {

// Mean-centered covariance pieces of (reward residual, centered feedback).
struct CenteredStats {
    Vector cov_rw;   // q
    Matrix cov_ww;   // q x q
    bool ok = false;
};

CenteredStats centered_stats(const ObservationLog& log, const Vector& theta_hat) {
    CenteredStats out;
    const int t = log.t();
    const int q = log.q;
    if (t < 3 || q == 0) return out;
    const double sum_r = log.sum_y - dot(log.sum_x, theta_hat);
    const Vector wtr = wty_residual(log, theta_hat);
    const double denom = static_cast<double>(t - 1);
    out.cov_rw.resize(q);
    out.cov_ww = Matrix(q, q);
    for (int i = 0; i < q; ++i) {
        out.cov_rw[i] = (wtr[i] - log.sum_wc[i] * sum_r / t) / denom;
        for (int j = 0; j < q; ++j)
            out.cov_ww(i, j) = (log.wtw(i, j) - log.sum_wc[i] * log.sum_wc[j] / t) / denom;
    }
    out.ok = true;
    return out;
}

double clamped_rho2(const Vector& cov_rw, const Matrix& cov_ww, double sigma2) {
    const CholeskyFactor factor = CholeskyFactor::compute(cov_ww, kGramPivot);
    const double raw = dot(cov_rw, factor.solve(cov_rw)) / sigma2;
    return std::clamp(raw, 0.0, 1.0);
}

}  // namespace

double sample_variance_known_sigma(const ObservationLog& log, double sigma2,
                                   const Vector& theta_hat) {
    if (log.t() < 3) throw std::invalid_argument("sample_variance_known_sigma requires t >= 3");
    if (sigma2 <= 0.0) throw std::invalid_argument("sample_variance_known_sigma: sigma2 <= 0");
    const CenteredStats stats = centered_stats(log, theta_hat);
    if (!stats.ok) return sigma2;
    try {
        const double rho2 = clamped_rho2(stats.cov_rw, stats.cov_ww, sigma2);
        return (1.0 - rho2) * sigma2;
    } catch (const NotPositiveDefinite&) {
        return sigma2;  // degenerate feedback variance: no reduction
    }
}

double variance_upper_bound(double nu_hat, int t, double delta) {
    if (t < 3) throw std::invalid_argument("variance_upper_bound requires t >= 3");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("variance_upper_bound: delta must be in (0,1)");
    if (nu_hat < 0.0) throw std::invalid_argument("variance_upper_bound: nu_hat < 0");
    return (t - 2) * nu_hat / chi2_quantile(1.0 - delta, t - 2);
}

double rho_e_squared(const CovarianceSpec& spec, const Matrix& f_e, double sigma2) {
    if (sigma2 <= 0.0) throw std::invalid_argument("rho_e_squared: sigma2 <= 0");
    const Matrix cov = hadamard(spec.sigma_ww, f_e);
    Vector scaled = spec.sigma_yw;
    for (int i = 0; i < f_e.rows; ++i) scaled[i] *= f_e(i, i);
    return dot(scaled, CholeskyFactor::compute(cov).solve(scaled)) / sigma2;
}

namespace {

double subset_proxy(const ObservationLog& log, const CenteredStats& stats,
                    const std::vector<int>& subset, double sigma2) {
    const int t = log.t();
    const int k = static_cast<int>(subset.size());
    if (k == 0) return sigma2;
    if (t - k - 2 <= 0) return std::numeric_limits<double>::infinity();
    Vector c(k);
    Matrix s(k, k);
    for (int a = 0; a < k; ++a) {
        c[a] = stats.cov_rw[subset[a]];
        for (int b = 0; b < k; ++b) s(a, b) = stats.cov_ww(subset[a], subset[b]);
    }
    double rho2 = 0.0;
    try {
        rho2 = clamped_rho2(c, s, sigma2);
    } catch (const NotPositiveDefinite&) {
        return std::numeric_limits<double>::infinity();
    }
    return (1.0 + static_cast<double>(k) / (t - k - 2)) * (1.0 - rho2) * sigma2;
}

// |correlation| of the residualized pair, residualizing on the selected
// columns with an intercept. Selected set empty = plain correlation.
double partial_correlation(const ObservationLog& log, const Vector& theta_hat,
                           const std::vector<int>& selected, int candidate) {
    const int t = log.t();
    const int k = static_cast<int>(selected.size());
    std::vector<double> r(t), wc(t);
    for (int s = 0; s < t; ++s) {
        const auto& rec = log.records[s];
        r[s] = rec.y - dot(rec.x, theta_hat);
        wc[s] = rec.w_centered[candidate];
    }
    if (k > 0) {
        // regress both on [1 | selected columns], keep residuals
        Matrix gram(k + 1, k + 1);
        Vector rhs_r(k + 1, 0.0), rhs_w(k + 1, 0.0);
        for (int s = 0; s < t; ++s) {
            const auto& rec = log.records[s];
            Vector row(k + 1);
            row[0] = 1.0;
            for (int a = 0; a < k; ++a) row[a + 1] = rec.w_centered[selected[a]];
            for (int a = 0; a <= k; ++a) {
                for (int b = 0; b <= k; ++b) gram(a, b) += row[a] * row[b];
                rhs_r[a] += row[a] * r[s];
                rhs_w[a] += row[a] * wc[s];
            }
        }
        CholeskyFactor factor = CholeskyFactor::compute(gram, kGramPivot);
        const Vector beta_r = factor.solve(rhs_r);
        const Vector beta_w = factor.solve(rhs_w);
        for (int s = 0; s < t; ++s) {
            const auto& rec = log.records[s];
            double fit_r = beta_r[0], fit_w = beta_w[0];
            for (int a = 0; a < k; ++a) {
                fit_r += beta_r[a + 1] * rec.w_centered[selected[a]];
                fit_w += beta_w[a + 1] * rec.w_centered[selected[a]];
            }
            r[s] -= fit_r;
            wc[s] -= fit_w;
        }
    }
    double mr = 0.0, mw = 0.0;
    for (int s = 0; s < t; ++s) {
        mr += r[s];
        mw += wc[s];
    }
    mr /= t;
    mw /= t;
    double crw = 0.0, crr = 0.0, cww = 0.0;
    for (int s = 0; s < t; ++s) {
        crw += (r[s] - mr) * (wc[s] - mw);
        crr += (r[s] - mr) * (r[s] - mr);
        cww += (wc[s] - mw) * (wc[s] - mw);
    }
    if (crr <= 0.0 || cww <= 0.0) return 0.0;
    return std::abs(crw) / std::sqrt(crr * cww);
}

}  // namespace

std::vector<int> select_feedback_subset(const ObservationLog& log, double sigma2,
                                        const Vector& theta_hat) {
    if (log.t() <= log.q + 2)
        throw std::invalid_argument("select_feedback_subset requires t > q + 2");
    const CenteredStats stats = centered_stats(log, theta_hat);
    std::vector<int> selected;
    if (!stats.ok) return selected;
    double proxy = subset_proxy(log, stats, selected, sigma2);

    std::vector<bool> used(log.q, false);
    while (static_cast<int>(selected.size()) < log.q) {
        int best = -1;
        double best_score = -1.0;
        for (int i = 0; i < log.q; ++i) {
            if (used[i]) continue;
            double score = 0.0;
            try {
                score = partial_correlation(log, theta_hat, selected, i);
            } catch (const NotPositiveDefinite&) {
                continue;
            }
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        if (best < 0) break;
        std::vector<int> trial = selected;
        trial.push_back(best);
        const double trial_proxy = subset_proxy(log, stats, trial, sigma2);
        if (trial_proxy >= proxy) break;
        selected = std::move(trial);
        used[best] = true;
        proxy = trial_proxy;
    }
    return selected;
}

Vector hybrid_reward_aggregate(const ObservationLog& log, const Vector& beta) {
    if (static_cast<int>(beta.size()) != log.q)
        throw std::invalid_argument("hybrid_reward_aggregate: beta length mismatch");
    Vector out = log.sum_xy;
    for (int j = 0; j < log.dim; ++j)
        for (int i = 0; i < log.q; ++i) out[j] -= log.sum_x_wc(j, i) * beta[i];
    return out;
}

HybridState refresh(const ObservationLog& log, const Vector& theta_hat, double sigma2,
                    double delta, const RefreshOptions& opts) {
    HybridState st;
    const int q = log.q;
    st.beta.assign(q, 0.0);
    if (opts.strategy == SamplingStrategy::exact) {
        st.f_e = Matrix(q, q);
        for (double& v : st.f_e.data) v = 1.0;
        st.a_factor = 1.0;
    } else {
        st.f_e = f_matrix(opts.ratios, opts.strategy);
        if (opts.strategy == SamplingStrategy::mf) {
            const double r = *std::min_element(opts.ratios.begin(), opts.ratios.end());
            st.a_factor = (r - 1.0) / r;
        } else {
            st.a_factor = 1.0;
        }
    }

    const int t = log.t();
    if (t <= q + 2) {
        st.nu_hat = sigma2;
        st.nu_bar = sigma2;
        return st;
    }

    st.nu_hat = sample_variance_known_sigma(log, sigma2, theta_hat);
    // The gate bound divides by the delta-quantile so that nu_bar >= nu_hat and
    // the sigma^2 fallback can fire; see variance_upper_bound for the exposed
    // percentile convention.
    const int dof = t - opts.dof_offset;
    double gate_ratio = 0.0;
    if (opts.gate_ratio_by_t && t < static_cast<int>(opts.gate_ratio_by_t->size()))
        gate_ratio = (*opts.gate_ratio_by_t)[t];
    else if (dof >= 1)
        gate_ratio = dof / chi2_quantile(delta, dof);
    st.nu_bar = gate_ratio > 0.0 ? gate_ratio * st.nu_hat : sigma2;

    if (st.nu_bar >= sigma2) return st;

    try {
        st.beta = opts.strategy == SamplingStrategy::exact
                      ? estimate_beta(log, theta_hat)
                      : estimate_beta_approx(log, theta_hat, st.f_e);
        st.active = true;
    } catch (const SingularGram&) {
        st.beta.assign(q, 0.0);
        st.active = false;
        st.nu_bar = sigma2;
    }
    return st;
}

}  // namespace banditcv
