#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnndbn {

/// Thrown when operand dimensions are incompatible.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an exact computation would exceed the enumeration budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown on malformed or out-of-range input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

/// Dense row-major matrix with explicit, strictly positive dimensions.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double &operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() noexcept { return data_; }
    std::span<const double> flat() const noexcept { return data_; }

    bool operator==(const Mat &) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

void require_size(std::span<const double> x, std::size_t n, const char *what);
void require_shape(const Mat &m, std::size_t rows, std::size_t cols, const char *what);

/// y = M x
Vec matvec(const Mat &m, std::span<const double> x);
/// y = M^T x
Vec matvec_t(const Mat &m, std::span<const double> x);
/// y += M x
void matvec_acc(const Mat &m, std::span<const double> x, std::span<double> y);
/// y += M^T x
void matvec_t_acc(const Mat &m, std::span<const double> x, std::span<double> y);
/// M += scale * a b^T
void outer_acc(Mat &m, std::span<const double> a, std::span<const double> b, double scale = 1.0);
/// y += a x
void axpy(double a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
/// Clamp every entry into [-threshold, threshold].
void clip(std::span<double> x, double threshold);

double log_sum_exp(std::span<const double> x);
/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// Smallest distance from 0 and 1 that sigmoid outputs keep.
inline constexpr double kSigmoidFloor = 1e-15;

double sigmoid(double x);
Vec sigmoid(std::span<const double> x);

/// Seeded pseudo-random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform doubles take the top 53 bits of each draw, Gaussians use
/// Box-Muller on two uniforms, and bounded integers use rejection sampling,
/// so streams are identical on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    double normal(double mean = 0.0, double stddev = 1.0);
    /// Uniform on {0, ..., n-1}; n must be positive.
    std::size_t uniform_index(std::size_t n);
    /// Fisher-Yates shuffle of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Independent Bernoulli draws; every p_i must lie in [0, 1].
Vec bernoulli_sample(std::span<const double> p, Rng &rng);

/// Uniform random binary vector of length n.
Vec random_binary(std::size_t n, Rng &rng);

/// Matrix with i.i.d. N(0, stddev^2) entries.
Mat gaussian_mat(std::size_t rows, std::size_t cols, double stddev, Rng &rng);

} // namespace rnndbn
