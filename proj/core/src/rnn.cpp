#include "rnndbn/rnn.hpp"

#include <cmath>

namespace rnndbn {

void RnnParams::validate() const
{
    if(W_vu.rows() == 0 || W_vu.cols() == 0)
        throw ShapeError("RnnParams: empty W_vu");
    require_shape(W_uu, n_units(), n_units(), "RnnParams W_uu");
    require_size(b_u, n_units(), "RnnParams b_u");
    require_size(u0, n_units(), "RnnParams u0");
}

namespace rnn {

RnnView::RnnView(const Mat &w_vu, const Mat &w_uu, std::span<const double> bu, std::span<const double> init)
    : W_vu(w_vu), W_uu(w_uu), b_u(bu), u0(init)
{
    require_shape(W_uu, W_vu.rows(), W_vu.rows(), "RnnView W_uu");
    require_size(b_u, W_vu.rows(), "RnnView b_u");
    require_size(u0, W_vu.rows(), "RnnView u0");
}

StateTrajectory rnn_forward(RnnView p, std::span<const Vec> vseq)
{
    if(vseq.empty())
        throw std::invalid_argument("rnn_forward: empty sequence");
    StateTrajectory traj;
    traj.u.reserve(vseq.size());
    std::span<const double> prev = p.u0;
    for(const auto &v : vseq) {
        require_size(v, p.W_vu.cols(), "rnn_forward frame");
        Vec act(p.b_u.begin(), p.b_u.end());
        matvec_acc(p.W_vu, v, act);
        matvec_acc(p.W_uu, prev, act);
        traj.u.push_back(sigmoid(act));
        prev = traj.u.back();
    }
    return traj;
}

RnnGrad bptt_gradients(RnnView p, std::span<const Vec> vseq, std::span<const Vec> dL_du)
{
    return bptt_gradients(p, vseq, rnn_forward(p, vseq), dL_du);
}

RnnGrad bptt_gradients(RnnView p, std::span<const Vec> vseq, const StateTrajectory &traj,
                       std::span<const Vec> dL_du)
{
    const std::size_t T = vseq.size();
    if(T == 0)
        throw std::invalid_argument("bptt_gradients: empty sequence");
    if(dL_du.size() != T || traj.length() != T)
        throw ShapeError("bptt_gradients: sequence, trajectory and dL_du lengths differ");
    const std::size_t nu = p.W_vu.rows();

    RnnGrad g{Mat(nu, p.W_vu.cols()), Mat(nu, nu), Vec(nu, 0.0), Vec(nu, 0.0)};
    Vec delta(nu, 0.0);
    Vec pre(nu);
    for(std::size_t t = T; t-- > 0;) {
        require_size(dL_du[t], nu, "bptt_gradients dL_du");
        axpy(1.0, dL_du[t], delta);
        const Vec &u = traj.u[t];
        for(std::size_t i = 0; i < nu; ++i)
            pre[i] = delta[i] * u[i] * (1.0 - u[i]);
        std::span<const double> prev = t > 0 ? std::span<const double>(traj.u[t - 1]) : p.u0;
        outer_acc(g.dW_vu, pre, vseq[t]);
        outer_acc(g.dW_uu, pre, prev);
        axpy(1.0, pre, g.db_u);
        delta.assign(nu, 0.0);
        matvec_t_acc(p.W_uu, pre, delta);
    }
    g.du0 = std::move(delta);
    return g;
}

} // namespace rnn
} // namespace rnndbn
