#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace banditcv {

using Vector = std::vector<double>;

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};
struct SingularGram : std::runtime_error {
    explicit SingularGram(const std::string& what) : std::runtime_error(what) {}
};
struct NegativeQuadraticForm : std::runtime_error {
    explicit NegativeQuadraticForm(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major matrix. Everything in this project is small (d <= 8, q <= 8,
/// Gram matrices up to ~100x100), so no attempt is made at blocking or views.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    static Matrix identity(int n);
    static Matrix zero(int r, int c) { return Matrix(r, c); }

    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector mat_vec(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);
Vector diagonal(const Matrix& a);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// `min_pivot` is the smallest accepted diagonal pivot of L*L^T; a pivot at or
/// below it throws NotPositiveDefinite.
class CholeskyFactor {
  public:
    static CholeskyFactor compute(const Matrix& a, double min_pivot = 0.0);

    Vector solve(const Vector& b) const;
    Matrix inverse() const;
    double min_diag_sq() const;  // smallest L_ii^2, i.e. smallest pivot
    int dim() const { return l_.rows; }

  private:
    explicit CholeskyFactor(Matrix l) : l_(std::move(l)) {}
    Matrix l_;
};

// x with ||Ax - b|| <= 1e-8 ||b||; A must be SPD (symmetric within 1e-10 relative).
Vector solve_spd(const Matrix& a, const Vector& b);

Matrix inverse_spd(const Matrix& a);

// A + x x^T, symmetry preserved.
Matrix rank1_update(Matrix a, const Vector& x);

// sqrt(x^T M x) for an SPD weight matrix M. Quadratic forms in [-1e-12, 0]
// are clamped to 0; anything below throws NegativeQuadraticForm.
double weighted_norm(const Vector& x, const Matrix& m);

// Regularized lower incomplete gamma P(a, x): series for x < a+1, continued
// fraction otherwise.
double regularized_gamma_p(double a, double x);

// q with P(dof/2, q/2) = p within 1e-8, by bisection.
double chi2_quantile(double p, int dof);

uint64_t splitmix64(uint64_t x);

// Seed for a (master, path...) stream; independent paths give decorrelated
// generators so replication i of experiment e can be re-derived exactly.
uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path);

/// Deterministic random source. The uniform stream is the standard-mandated
/// mt19937_64 output; normals use an explicit Box-Muller transform (two
/// uniforms per draw, no cached spare) so streams are bit-identical across
/// platforms and call sites.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform();
    double uniform(double lo, double hi);

    // N(mean, variance); variance 0 returns mean exactly
    double gaussian(double mean, double variance);

  private:
    std::mt19937_64 gen_;
};

}  // namespace banditcv
