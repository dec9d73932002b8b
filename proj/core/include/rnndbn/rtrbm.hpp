#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rnndbn/config.hpp"
#include "rnndbn/rbm.hpp"
#include "rnndbn/rnn.hpp"

namespace rnndbn {

/// Per-frame log-likelihood ascent direction for a conditional RBM whose
/// biases have already been shifted for the current time step.
using FrameGradientFn = std::function<RbmGrad(RbmView, std::span<const double>)>;

/// CD-k frame statistics drawing from rng. When recon_error is non-null the
/// squared reconstruction error of every frame is added to it.
FrameGradientFn cd_frame_gradient(std::size_t k, Rng &rng, double *recon_error = nullptr);

/// Recurrent temporal RBM with history-dependent biases. The mean-field
/// state has the hidden width, so n_u = n_h.
struct RtrbmParams {
    Mat W;    ///< n_h x n_v
    Vec b_v;
    Vec b_h;
    Mat W_uv; ///< n_v x n_h
    Mat W_uh; ///< n_h x n_h
    Vec u0;

    std::size_t n_visible() const noexcept { return W.cols(); }
    std::size_t n_hidden() const noexcept { return W.rows(); }

    void validate() const;

    bool operator==(const RtrbmParams &) const = default;
};

/// Gradients share the parameter layout.
using RtrbmGrad = RtrbmParams;

namespace rtrbm {

RtrbmParams init(std::size_t n_visible, std::size_t n_hidden, Rng &rng);
RtrbmGrad zeros_like(const RtrbmParams &p);

/// (b_v + W_uv u_prev, b_h + W_uh u_prev)
std::pair<Vec, Vec> rtrbm_biases(const RtrbmParams &p, std::span<const double> u_prev);

/// u(t) = sigmoid(W v(t) + W_uh u(t-1) + b_h)
StateTrajectory rtrbm_forward(const RtrbmParams &p, std::span<const Vec> vseq);

/// Ascent direction on sum_t log p(v(t) | history), with per-frame
/// statistics from frame_grad pushed back through the mean-field recurrence.
RtrbmGrad rtrbm_gradient(const RtrbmParams &p, std::span<const Vec> vseq, const FrameGradientFn &frame_grad);

RtrbmParams apply_update(const RtrbmParams &p, const RtrbmGrad &g, double learning_rate);
void clip(RtrbmGrad &g, double threshold);

/// One CD-k ascent step on a single sequence.
RtrbmParams rtrbm_train_step(const RtrbmParams &p, std::span<const Vec> vseq, const TrainConfig &cfg, Rng &rng);

/// One pass over shuffled sequences; gradients are averaged over each
/// batch of cfg.batch_size sequences. Reports mean reconstruction error per frame.
RtrbmParams train_epoch(const RtrbmParams &p, std::span<const std::vector<Vec>> sequences, const TrainConfig &cfg,
                        Rng &rng, double *mean_recon_error = nullptr);

/// Samples `length` frames, each by gibbs_steps of block Gibbs in the
/// conditional RBM warm-started from the previous frame (zeros at first).
/// A primer, when given, only sets the starting state.
std::vector<Vec> rtrbm_generate(const RtrbmParams &p, std::size_t length, std::size_t gibbs_steps, Rng &rng,
                                std::span<const Vec> primer = {});

/// Exact log p(v(t) | history) for every frame.
std::vector<double> frame_log_probs(const RtrbmParams &p, std::span<const Vec> vseq, std::size_t max_bits = 24);

} // namespace rtrbm
} // namespace rnndbn
