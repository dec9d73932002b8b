#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rnndbn/numerics.hpp"

namespace rnndbn {

/// Single-layer sigmoid RNN: u(t) = sigmoid(W_vu v(t) + W_uu u(t-1) + b_u), u(0) = u0.
struct RnnParams {
    Mat W_vu; ///< n_u x n_v
    Mat W_uu; ///< n_u x n_u
    Vec b_u;
    Vec u0;

    std::size_t n_visible() const noexcept { return W_vu.cols(); }
    std::size_t n_units() const noexcept { return W_vu.rows(); }

    void validate() const;
};

/// Derivatives of a scalar loss with respect to every RnnParams field.
struct RnnGrad {
    Mat dW_vu;
    Mat dW_uu;
    Vec db_u;
    Vec du0;
};

/// Hidden states u(1..T); u(0) is not included.
struct StateTrajectory {
    std::vector<Vec> u;

    std::size_t length() const noexcept { return u.size(); }
};

namespace rnn {

/// Weights use the same references as the recurrence so that callers can
/// reuse this machinery with shared parameters.
struct RnnView {
    const Mat &W_vu;
    const Mat &W_uu;
    std::span<const double> b_u;
    std::span<const double> u0;

    RnnView(const RnnParams &p) : W_vu(p.W_vu), W_uu(p.W_uu), b_u(p.b_u), u0(p.u0) {} // NOLINT
    RnnView(const Mat &w_vu, const Mat &w_uu, std::span<const double> bu, std::span<const double> init);
};

StateTrajectory rnn_forward(RnnView p, std::span<const Vec> vseq);

/// Full backpropagation through time. dL_du[t] is the external derivative
/// of the loss with respect to u(t+1), excluding the path through later
/// states. The returned du0 covers only the path through u(1); callers
/// add any direct dependence of the loss on u0 themselves.
RnnGrad bptt_gradients(RnnView p, std::span<const Vec> vseq, std::span<const Vec> dL_du);

/// Same as above with a trajectory from rnn_forward(p, vseq).
RnnGrad bptt_gradients(RnnView p, std::span<const Vec> vseq, const StateTrajectory &traj,
                       std::span<const Vec> dL_du);

} // namespace rnn
} // namespace rnndbn
