#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "rnndbn/config.hpp"
#include "rnndbn/dbn.hpp"
#include "rnndbn/rbm.hpp"
#include "rnndbn/rnn.hpp"

namespace rnndbn {

/// Two-hidden-layer DBN whose three bias vectors are shifted at every time
/// step by a separate sigmoid RNN over the visible frames.
struct RnnDbnParams {
    Mat W_vh1;  ///< n_h1 x n_v
    Mat W_h1h2; ///< n_h2 x n_h1
    Vec b_v;
    Vec b_h1;
    Vec b_h2;
    Mat W_uv;   ///< n_v x n_u
    Mat W_uh1;  ///< n_h1 x n_u
    Mat W_uh2;  ///< n_h2 x n_u
    Vec u0;
    Mat W_vu;   ///< n_u x n_v
    Mat W_uu;   ///< n_u x n_u
    Vec b_u;

    std::size_t n_visible() const noexcept { return W_vh1.cols(); }
    std::size_t n_h1() const noexcept { return W_vh1.rows(); }
    std::size_t n_h2() const noexcept { return W_h1h2.rows(); }
    std::size_t n_units() const noexcept { return W_vu.rows(); }

    void validate() const;

    bool operator==(const RnnDbnParams &) const = default;
};

/// Gradients share the parameter layout.
using RnnDbnGrad = RnnDbnParams;

struct TimeBiases {
    Vec b_v;
    Vec b_h1;
    Vec b_h2;
};

/// The DBN in force at one time step. Weights are borrowed from the
/// parameters it was built from, which must outlive it.
struct ConditionalDbn {
    const RnnDbnParams *params;
    TimeBiases biases;

    /// (W_vh1, b_v(t), b_h1(t))
    RbmView layer1() const { return {params->W_vh1, biases.b_v, biases.b_h1}; }
    /// (W_h1h2, b_h1(t), b_h2(t)); its visible layer is h1.
    RbmView layer2() const { return {params->W_h1h2, biases.b_h1, biases.b_h2}; }
    /// Owning copy as a general two-layer stack.
    DbnParams to_dbn() const;
};

/// Per-frame bias derivatives kept for backpropagation through time.
struct FrameBiasGrad {
    Vec db_v;
    Vec db_h1;
    Vec db_h2;
};

/// One sequence of a batch together with its per-frame conditional DBNs.
struct SequenceFrames {
    std::span<const Vec> frames;
    std::vector<ConditionalDbn> conds;
};

/// Statistics for a batch: weight derivatives summed over all frames and
/// the per-frame bias derivatives, indexed [sequence][t].
struct BatchStats {
    Mat dW_vh1;
    Mat dW_h1h2;
    std::vector<std::vector<FrameBiasGrad>> bias;
    double recon_error = 0.0;
};

/// Fills a zero-initialised BatchStats with log-likelihood ascent
/// directions for every frame of every sequence.
using DbnStatisticsFn = std::function<void(std::span<const SequenceFrames>, BatchStats &)>;

namespace rnn_dbn {

inline constexpr std::size_t kBlockCount = 12;

RnnDbnParams init(std::size_t n_visible, std::size_t n_h1, std::size_t n_h2, std::size_t n_units, Rng &rng);
RnnDbnGrad zeros_like(const RnnDbnParams &p);

/// Visits the twelve parameter blocks in a fixed order.
void for_each_block(RnnDbnParams &p, const std::function<void(std::string_view, std::span<double>)> &f);
void for_each_block(const RnnDbnParams &p, const std::function<void(std::string_view, std::span<const double>)> &f);

std::vector<double> flatten(const RnnDbnParams &p);
/// Overwrites every block of p from a vector produced by flatten.
void unflatten(std::span<const double> flat, RnnDbnParams &p);

/// b_v + W_uv u, b_h1 + W_uh1 u, b_h2 + W_uh2 u
TimeBiases time_dependent_biases(const RnnDbnParams &p, std::span<const double> u_prev);

/// u(t) = sigmoid(W_vu v(t) + W_uu u(t-1) + b_u), u(0) = u0.
StateTrajectory forward_hidden_states(const RnnDbnParams &p, std::span<const Vec> vseq);

ConditionalDbn conditional_dbn_at(const RnnDbnParams &p, std::span<const double> u_prev);

/// Conditional DBNs for every frame of vseq, using u(t-1) for frame t.
std::vector<ConditionalDbn> conditional_dbns(const RnnDbnParams &p, std::span<const Vec> vseq,
                                             const StateTrajectory &traj);

/// Greedy layer-wise CD-k over a batch: layer 1 runs over every frame on
/// the raw data, then layer 2 runs over every frame on the layer-1 mean
/// activations. b_h1 collects both layers' contributions.
DbnStatisticsFn cd_statistics(std::size_t k, Rng &rng);

/// Sum over sequences of the ascent direction on sum_t log p(v(t) | history):
/// frame statistics for the DBN weights and time-dependent biases, coupling
/// matrices through the bias offsets, and the RNN through BPTT.
RnnDbnGrad gradient(const RnnDbnParams &p, std::span<const std::vector<Vec>> batch, const DbnStatisticsFn &stats,
                    double *recon_error = nullptr);

RnnDbnParams apply_update(const RnnDbnParams &p, const RnnDbnGrad &g, double learning_rate);

/// One pass over the shuffled dataset with minibatches of cfg.batch_size
/// sequences. Returns the updated parameters; mean_objective receives the
/// mean per-frame CD reconstruction error.
RnnDbnParams train_epoch(const RnnDbnParams &p, std::span<const std::vector<Vec>> dataset, const TrainConfig &cfg,
                         Rng &rng, double *mean_objective = nullptr);

/// Samples `length` frames. Each frame starts from h1 ~ P(h1 | previous
/// frame), runs cfg.gen_gibbs_steps Gibbs sweeps in the top RBM, then draws
/// v ~ P(v | h1). The RNN then consumes the sampled frame (or P(v | h1)
/// when cfg.generate_from_mean is set). A primer warms up the state only.
std::vector<Vec> generate(const RnnDbnParams &p, std::size_t length, std::span<const Vec> primer,
                          const TrainConfig &cfg, Rng &rng);

struct LlOptions {
    /// Cap on the number of binary units enumerated by the exact evaluator.
    std::size_t max_enumerated_bits = 24;
    /// Fall back to an importance-sampled estimate when exact is out of budget.
    bool allow_approx = false;
    std::size_t importance_samples = 1000;
    std::uint64_t seed = 0;
};

struct FrameLl {
    std::vector<double> per_frame;
    double mean = 0.0;
    bool exact = true;
};

/// log p(v(t) | history) for each frame. Exact when both the h1 sum and the
/// top partition function fit the budget; otherwise, if allowed, an
/// importance-sampled estimate (biased low in expectation) using the
/// layer-1 posterior as proposal. Throws BudgetError when neither applies.
FrameLl frame_conditional_ll(const RnnDbnParams &p, std::span<const Vec> seq, const LlOptions &opts = {});

} // namespace rnn_dbn
} // namespace rnndbn
