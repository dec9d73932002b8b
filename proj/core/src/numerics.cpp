#include "rnndbn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rnndbn {

Mat::Mat(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols)
{
    if(rows == 0 || cols == 0)
        throw ShapeError("matrix dimensions must be positive");
    data_.assign(rows * cols, fill);
}

void require_size(std::span<const double> x, std::size_t n, const char *what)
{
    if(x.size() != n)
        throw ShapeError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(x.size()));
}

void require_shape(const Mat &m, std::size_t rows, std::size_t cols, const char *what)
{
    if(m.rows() != rows || m.cols() != cols)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
}

Vec matvec(const Mat &m, std::span<const double> x)
{
    Vec y(m.rows(), 0.0);
    matvec_acc(m, x, y);
    return y;
}

Vec matvec_t(const Mat &m, std::span<const double> x)
{
    Vec y(m.cols(), 0.0);
    matvec_t_acc(m, x, y);
    return y;
}

void matvec_acc(const Mat &m, std::span<const double> x, std::span<double> y)
{
    require_size(x, m.cols(), "matvec input");
    require_size(y, m.rows(), "matvec output");
    for(std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        double s = 0.0;
        for(std::size_t c = 0; c < row.size(); ++c)
            s += row[c] * x[c];
        y[r] += s;
    }
}

void matvec_t_acc(const Mat &m, std::span<const double> x, std::span<double> y)
{
    require_size(x, m.rows(), "matvec_t input");
    require_size(y, m.cols(), "matvec_t output");
    for(std::size_t r = 0; r < m.rows(); ++r) {
        const double xr = x[r];
        if(xr == 0.0)
            continue;
        auto row = m.row(r);
        for(std::size_t c = 0; c < row.size(); ++c)
            y[c] += row[c] * xr;
    }
}

void outer_acc(Mat &m, std::span<const double> a, std::span<const double> b, double scale)
{
    require_size(a, m.rows(), "outer product rows");
    require_size(b, m.cols(), "outer product cols");
    for(std::size_t r = 0; r < m.rows(); ++r) {
        const double ar = scale * a[r];
        auto row = m.row(r);
        for(std::size_t c = 0; c < row.size(); ++c)
            row[c] += ar * b[c];
    }
}

void axpy(double a, std::span<const double> x, std::span<double> y)
{
    require_size(y, x.size(), "axpy");
    for(std::size_t i = 0; i < x.size(); ++i)
        y[i] += a * x[i];
}

double dot(std::span<const double> a, std::span<const double> b)
{
    require_size(b, a.size(), "dot");
    double s = 0.0;
    for(std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

void clip(std::span<double> x, double threshold)
{
    for(auto &v : x)
        v = std::clamp(v, -threshold, threshold);
}

double log_sum_exp(std::span<const double> x)
{
    if(x.empty())
        return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(x.begin(), x.end());
    if(!std::isfinite(m))
        return m;
    double s = 0.0;
    for(double v : x)
        s += std::exp(v - m);
    return m + std::log(s);
}

double softplus(double x)
{
    if(x > 0.0)
        return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x)
{
    double s;
    if(x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    return std::clamp(s, kSigmoidFloor, 1.0 - kSigmoidFloor);
}

Vec sigmoid(std::span<const double> x)
{
    Vec y(x.size());
    std::transform(x.begin(), x.end(), y.begin(), [](double v) { return sigmoid(v); });
    return y;
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev)
{
    // 1 - uniform() lies in (0, 1], so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

std::size_t Rng::uniform_index(std::size_t n)
{
    if(n == 0)
        throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while(x >= limit);
    return static_cast<std::size_t>(x % bound);
}

std::vector<std::size_t> Rng::permutation(std::size_t n)
{
    std::vector<std::size_t> idx(n);
    for(std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    for(std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[uniform_index(i)]);
    return idx;
}

Vec bernoulli_sample(std::span<const double> p, Rng &rng)
{
    Vec out(p.size());
    for(std::size_t i = 0; i < p.size(); ++i) {
        if(!(p[i] >= 0.0 && p[i] <= 1.0))
            throw std::invalid_argument("bernoulli_sample: probability outside [0, 1] at index " +
                                        std::to_string(i));
        out[i] = rng.uniform() < p[i] ? 1.0 : 0.0;
    }
    return out;
}

Vec random_binary(std::size_t n, Rng &rng)
{
    Vec out(n);
    for(auto &v : out)
        v = (rng.next_u64() >> 63) != 0 ? 1.0 : 0.0;
    return out;
}

Mat gaussian_mat(std::size_t rows, std::size_t cols, double stddev, Rng &rng)
{
    Mat m(rows, cols);
    for(auto &v : m.flat())
        v = rng.normal(0.0, stddev);
    return m;
}

} // namespace rnndbn
