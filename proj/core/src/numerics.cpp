#include "banditcv/numerics.hpp"

#include <cmath>
#include <limits>

namespace banditcv {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("matrix shape mismatch in operator+");
    Matrix out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matrix shape mismatch in operator*");
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Vector mat_vec(const Matrix& a, const Vector& x) {
    if (a.cols != static_cast<int>(x.size()))
        throw std::invalid_argument("matrix/vector shape mismatch in mat_vec");
    Vector out(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        out[i] = s;
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("matrix shape mismatch in hadamard");
    Matrix out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

Vector diagonal(const Matrix& a) {
    const int n = std::min(a.rows, a.cols);
    Vector d(n);
    for (int i = 0; i < n; ++i) d[i] = a(i, i);
    return d;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vector length mismatch in dot");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

CholeskyFactor CholeskyFactor::compute(const Matrix& a, double min_pivot) {
    if (a.rows != a.cols) throw std::invalid_argument("Cholesky needs a square matrix");
    const int n = a.rows;
    Matrix l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= min_pivot)
                    throw NotPositiveDefinite("non-positive pivot in Cholesky factorization");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return CholeskyFactor(std::move(l));
}

Vector CholeskyFactor::solve(const Vector& b) const {
    const int n = l_.rows;
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("dimension mismatch in Cholesky solve");
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l_(i, k) * y[k];
        y[i] = s / l_(i, i);
    }
    Vector x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l_(k, i) * x[k];
        x[i] = s / l_(i, i);
    }
    return x;
}

Matrix CholeskyFactor::inverse() const {
    const int n = l_.rows;
    Matrix inv(n, n);
    Vector e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        Vector col = solve(e);
        e[j] = 0.0;
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

double CholeskyFactor::min_diag_sq() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < l_.rows; ++i) m = std::min(m, l_(i, i) * l_(i, i));
    return m;
}

namespace {

void check_symmetric(const Matrix& a) {
    double scale = 0.0;
    for (double v : a.data) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return;
    for (int i = 0; i < a.rows; ++i)
        for (int j = i + 1; j < a.cols; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-10 * scale)
                throw std::invalid_argument("matrix is not symmetric within 1e-10 relative");
}

}  // namespace

Vector solve_spd(const Matrix& a, const Vector& b) {
    if (a.rows != a.cols) throw std::invalid_argument("solve_spd needs a square matrix");
    if (a.rows != static_cast<int>(b.size()))
        throw std::invalid_argument("solve_spd dimension mismatch");
    check_symmetric(a);
    return CholeskyFactor::compute(a).solve(b);
}

Matrix inverse_spd(const Matrix& a) {
    if (a.rows != a.cols) throw std::invalid_argument("inverse_spd needs a square matrix");
    check_symmetric(a);
    return CholeskyFactor::compute(a).inverse();
}

Matrix rank1_update(Matrix a, const Vector& x) {
    if (a.rows != a.cols || a.rows != static_cast<int>(x.size()))
        throw std::invalid_argument("rank1_update dimension mismatch");
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) a(i, j) += x[i] * x[j];
    return a;
}

double weighted_norm(const Vector& x, const Matrix& m) {
    if (m.rows != m.cols || m.rows != static_cast<int>(x.size()))
        throw std::invalid_argument("weighted_norm dimension mismatch");
    double q = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
        q += x[i] * s;
    }
    if (q < -1e-12) throw NegativeQuadraticForm("x^T M x < -1e-12; matrix is not SPD");
    if (q < 0.0) q = 0.0;
    return std::sqrt(q);
}

namespace {

double log_gamma(double x) { return std::lgamma(x); }

// Series expansion, valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("regularized_gamma_p domain error");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_quantile(double p, int dof) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("chi2_quantile: p must be in (0,1)");
    if (dof < 1) throw std::invalid_argument("chi2_quantile: dof must be >= 1");
    const double a = 0.5 * dof;
    const auto cdf = [a](double q) { return regularized_gamma_p(a, 0.5 * q); };

    // Wilson-Hilferty gives a bracket seed; widen until it actually brackets.
    const double z = (p < 0.5 ? -1.0 : 1.0) *
                     std::sqrt(std::max(0.0, -2.0 * std::log(p < 0.5 ? p : 1.0 - p)));
    const double wh = dof * std::pow(std::max(0.05, 1.0 - 2.0 / (9.0 * dof) +
                                                        z * std::sqrt(2.0 / (9.0 * dof))),
                                     3.0);
    double lo = wh, hi = wh;
    while (lo > 0.0 && cdf(lo) > p) lo *= 0.5;
    while (cdf(hi) < p) hi = hi * 2.0 + 1.0;
    if (lo == hi) lo = 0.0;

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path) {
    uint64_t s = splitmix64(master);
    for (uint64_t k : path) s = splitmix64(s ^ splitmix64(k));
    return s;
}

double Rng::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian(double mean, double variance) {
    if (variance < 0.0) throw std::invalid_argument("gaussian: negative variance");
    if (variance == 0.0) return mean;
    // u1 in (0,1] so the log is finite
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    const double z =
        std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    return mean + std::sqrt(variance) * z;
}

}  // namespace banditcv
