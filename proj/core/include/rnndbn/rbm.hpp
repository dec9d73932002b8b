#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "rnndbn/config.hpp"
#include "rnndbn/numerics.hpp"

namespace rnndbn {

/// One binary-binary RBM layer. W is n_hidden x n_visible.
struct RbmParams {
    Mat W;
    Vec b_v;
    Vec b_h;

    std::size_t n_visible() const noexcept { return W.cols(); }
    std::size_t n_hidden() const noexcept { return W.rows(); }

    /// Throws ShapeError if the biases do not match W or any entry is non-finite.
    void validate() const;

    bool operator==(const RbmParams &) const = default;
};

/// Non-owning view of RBM parameters; lets conditional models substitute
/// time-dependent biases without copying the weight matrix.
struct RbmView {
    const Mat &W;
    std::span<const double> b_v;
    std::span<const double> b_h;

    RbmView(const RbmParams &p) : W(p.W), b_v(p.b_v), b_h(p.b_h) {} // NOLINT: implicit by intent
    RbmView(const Mat &w, std::span<const double> bv, std::span<const double> bh);

    std::size_t n_visible() const noexcept { return W.cols(); }
    std::size_t n_hidden() const noexcept { return W.rows(); }
};

/// Log-likelihood ascent direction for an RBM (same shapes as RbmParams).
struct RbmGrad {
    Mat dW;
    Vec db_v;
    Vec db_h;

    RbmGrad() = default;
    RbmGrad(std::size_t n_visible, std::size_t n_hidden);

    RbmGrad &operator+=(const RbmGrad &o);
    void scale(double s);
    void clip(double threshold);
};

struct GibbsSample {
    Vec v;
    Vec h;
};

namespace rbm {

/// Weights ~ N(0, 0.01^2), biases zero.
RbmParams init(std::size_t n_visible, std::size_t n_hidden, Rng &rng);

/// E(v,h) = -b_v.v - b_h.h - h.W v
double energy(RbmView p, std::span<const double> v, std::span<const double> h);

/// F(v) = -b_v.v - sum_i log(1 + exp(b_h,i + W_i v))
double free_energy(RbmView p, std::span<const double> v);

/// Free energy of the hidden marginal: -b_h.h - sum_j log(1 + exp(b_v,j + W^T_j h)).
double hidden_free_energy(RbmView p, std::span<const double> h);

Vec prob_h_given_v(RbmView p, std::span<const double> v);
Vec prob_v_given_h(RbmView p, std::span<const double> h);

/// h ~ P(h|v), then v' ~ P(v|h).
GibbsSample gibbs_step(RbmView p, std::span<const double> v, Rng &rng);

/// Adds one example's CD-k statistics to acc and returns the squared
/// reconstruction error sum_j (v_j - v^(k)_j)^2. Inputs may be mean
/// activations in [0, 1] rather than strict binaries.
double cd_k_accumulate(RbmView p, std::span<const double> v, std::size_t k, Rng &rng, RbmGrad &acc);

/// Batch-averaged CD-k estimate of the log-likelihood gradient.
RbmGrad cd_k_gradient(RbmView p, std::span<const Vec> batch, std::size_t k, Rng &rng);

/// Same as cd_k_gradient, also reporting the summed reconstruction error.
RbmGrad cd_k_gradient(RbmView p, std::span<const Vec> batch, std::size_t k, Rng &rng, double &recon_error);

/// p + learning_rate * g
RbmParams apply_update(const RbmParams &p, const RbmGrad &g, double learning_rate);

/// log Z summed over whichever layer is smaller. Throws BudgetError when
/// that layer is wider than max_bits.
double log_partition(RbmView p, std::size_t max_bits = 24);

/// log p(v) = -F(v) - log Z
double log_prob(RbmView p, std::span<const double> v, double log_z);

/// Block Gibbs from a uniform random visible start; returns the final visible state.
Vec sample(RbmView p, std::size_t gibbs_steps, Rng &rng);

/// Called after each epoch with (epoch starting at 1, mean reconstruction error per example).
using EpochCallback = std::function<void(std::size_t, double)>;

/// One pass of minibatch CD-k over a seeded shuffle of data.
RbmParams train_epoch(const RbmParams &p, std::span<const Vec> data, const TrainConfig &cfg, Rng &rng,
                      double *mean_recon_error = nullptr);

/// cfg.epochs passes of train_epoch.
RbmParams train(RbmParams p, std::span<const Vec> data, const TrainConfig &cfg, Rng &rng,
                const EpochCallback &on_epoch = {});

} // namespace rbm

/// Binary vector whose bit j is bit j of index.
Vec binary_from_index(std::uint64_t index, std::size_t n);
/// Inverse of binary_from_index; entries must be 0 or 1.
std::uint64_t index_from_binary(std::span<const double> v);

} // namespace rnndbn
