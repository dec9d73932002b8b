#include "rnndbn/rtrbm.hpp"

namespace rnndbn {

FrameGradientFn cd_frame_gradient(std::size_t k, Rng &rng, double *recon_error)
{
    if(k < 1)
        throw std::invalid_argument("cd_frame_gradient: k must be at least 1");
    return [k, &rng, recon_error](RbmView p, std::span<const double> v) {
        RbmGrad g(p.n_visible(), p.n_hidden());
        const double err = rbm::cd_k_accumulate(p, v, k, rng, g);
        if(recon_error)
            *recon_error += err;
        return g;
    };
}

void RtrbmParams::validate() const
{
    if(W.rows() == 0 || W.cols() == 0)
        throw ShapeError("RtrbmParams: empty W");
    require_size(b_v, n_visible(), "RtrbmParams b_v");
    require_size(b_h, n_hidden(), "RtrbmParams b_h");
    require_shape(W_uv, n_visible(), n_hidden(), "RtrbmParams W_uv");
    require_shape(W_uh, n_hidden(), n_hidden(), "RtrbmParams W_uh");
    require_size(u0, n_hidden(), "RtrbmParams u0");
}

namespace rtrbm {

namespace {

template <typename F>
void for_each_field(RtrbmParams &a, const RtrbmParams &b, F &&f)
{
    f(a.W.flat(), b.W.flat());
    f(std::span<double>(a.b_v), std::span<const double>(b.b_v));
    f(std::span<double>(a.b_h), std::span<const double>(b.b_h));
    f(a.W_uv.flat(), b.W_uv.flat());
    f(a.W_uh.flat(), b.W_uh.flat());
    f(std::span<double>(a.u0), std::span<const double>(b.u0));
}

void require_frames(const RtrbmParams &p, std::span<const Vec> vseq)
{
    if(vseq.empty())
        throw std::invalid_argument("rtrbm: empty sequence");
    for(const auto &v : vseq)
        require_size(v, p.n_visible(), "rtrbm frame");
}

} // namespace

RtrbmParams init(std::size_t n_visible, std::size_t n_hidden, Rng &rng)
{
    RtrbmParams p;
    p.W = gaussian_mat(n_hidden, n_visible, 0.01, rng);
    p.b_v.assign(n_visible, 0.0);
    p.b_h.assign(n_hidden, 0.0);
    p.W_uv = gaussian_mat(n_visible, n_hidden, 0.01, rng);
    p.W_uh = gaussian_mat(n_hidden, n_hidden, 0.01, rng);
    p.u0.assign(n_hidden, 0.0);
    return p;
}

RtrbmGrad zeros_like(const RtrbmParams &p)
{
    RtrbmGrad g;
    g.W = Mat(p.W.rows(), p.W.cols());
    g.b_v.assign(p.b_v.size(), 0.0);
    g.b_h.assign(p.b_h.size(), 0.0);
    g.W_uv = Mat(p.W_uv.rows(), p.W_uv.cols());
    g.W_uh = Mat(p.W_uh.rows(), p.W_uh.cols());
    g.u0.assign(p.u0.size(), 0.0);
    return g;
}

std::pair<Vec, Vec> rtrbm_biases(const RtrbmParams &p, std::span<const double> u_prev)
{
    require_size(u_prev, p.n_hidden(), "rtrbm_biases u_prev");
    Vec bv = p.b_v;
    Vec bh = p.b_h;
    matvec_acc(p.W_uv, u_prev, bv);
    matvec_acc(p.W_uh, u_prev, bh);
    return {std::move(bv), std::move(bh)};
}

StateTrajectory rtrbm_forward(const RtrbmParams &p, std::span<const Vec> vseq)
{
    p.validate();
    require_frames(p, vseq);
    return rnn::rnn_forward(rnn::RnnView(p.W, p.W_uh, p.b_h, p.u0), vseq);
}

RtrbmGrad rtrbm_gradient(const RtrbmParams &p, std::span<const Vec> vseq, const FrameGradientFn &frame_grad)
{
    const StateTrajectory traj = rtrbm_forward(p, vseq);
    const std::size_t T = vseq.size();
    const std::size_t nh = p.n_hidden();

    RtrbmGrad g = zeros_like(p);
    std::vector<Vec> dL_du(T, Vec(nh, 0.0));
    for(std::size_t t = 0; t < T; ++t) {
        std::span<const double> u_prev = t == 0 ? std::span<const double>(p.u0) : traj.u[t - 1];
        const auto [bv, bh] = rtrbm_biases(p, u_prev);
        const RbmGrad fg = frame_grad(RbmView(p.W, bv, bh), vseq[t]);

        axpy(1.0, fg.dW.flat(), g.W.flat());
        axpy(1.0, fg.db_v, g.b_v);
        axpy(1.0, fg.db_h, g.b_h);
        outer_acc(g.W_uv, fg.db_v, u_prev);
        outer_acc(g.W_uh, fg.db_h, u_prev);

        std::span<double> ext = t == 0 ? std::span<double>(g.u0) : std::span<double>(dL_du[t - 1]);
        matvec_t_acc(p.W_uv, fg.db_v, ext);
        matvec_t_acc(p.W_uh, fg.db_h, ext);
    }

    const RnnGrad r = rnn::bptt_gradients(rnn::RnnView(p.W, p.W_uh, p.b_h, p.u0), vseq, traj, dL_du);
    axpy(1.0, r.dW_vu.flat(), g.W.flat());
    axpy(1.0, r.dW_uu.flat(), g.W_uh.flat());
    axpy(1.0, r.db_u, g.b_h);
    axpy(1.0, r.du0, g.u0);
    return g;
}

RtrbmParams apply_update(const RtrbmParams &p, const RtrbmGrad &g, double learning_rate)
{
    g.validate();
    RtrbmParams out = p;
    for_each_field(out, g, [learning_rate](std::span<double> dst, std::span<const double> src) {
        require_size(src, dst.size(), "rtrbm apply_update");
        axpy(learning_rate, src, dst);
    });
    return out;
}

void clip(RtrbmGrad &g, double threshold)
{
    rnndbn::clip(g.W.flat(), threshold);
    rnndbn::clip(g.b_v, threshold);
    rnndbn::clip(g.b_h, threshold);
    rnndbn::clip(g.W_uv.flat(), threshold);
    rnndbn::clip(g.W_uh.flat(), threshold);
    rnndbn::clip(g.u0, threshold);
}

RtrbmParams rtrbm_train_step(const RtrbmParams &p, std::span<const Vec> vseq, const TrainConfig &cfg, Rng &rng)
{
    cfg.validate();
    RtrbmGrad g = rtrbm_gradient(p, vseq, cd_frame_gradient(cfg.cd_k, rng));
    if(cfg.clip_threshold)
        clip(g, *cfg.clip_threshold);
    return apply_update(p, g, cfg.learning_rate);
}

RtrbmParams train_epoch(const RtrbmParams &p, std::span<const std::vector<Vec>> sequences, const TrainConfig &cfg,
                        Rng &rng, double *mean_recon_error)
{
    if(sequences.empty())
        throw std::invalid_argument("rtrbm train_epoch: empty dataset");
    cfg.validate();
    const auto order = rng.permutation(sequences.size());
    RtrbmParams cur = p;
    double err = 0.0;
    std::size_t frames = 0;
    for(std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        RtrbmGrad acc = zeros_like(cur);
        const auto frame_grad = cd_frame_gradient(cfg.cd_k, rng, &err);
        for(std::size_t i = start; i < end; ++i) {
            const auto &seq = sequences[order[i]];
            const RtrbmGrad g = rtrbm_gradient(cur, seq, frame_grad);
            for_each_field(acc, g, [](std::span<double> dst, std::span<const double> src) { axpy(1.0, src, dst); });
            frames += seq.size();
        }
        const double inv = 1.0 / static_cast<double>(end - start);
        for_each_field(acc, acc, [inv](std::span<double> dst, std::span<const double>) {
            for(auto &x : dst)
                x *= inv;
        });
        if(cfg.clip_threshold)
            clip(acc, *cfg.clip_threshold);
        cur = apply_update(cur, acc, cfg.learning_rate);
    }
    if(mean_recon_error)
        *mean_recon_error = err / static_cast<double>(frames);
    return cur;
}

std::vector<Vec> rtrbm_generate(const RtrbmParams &p, std::size_t length, std::size_t gibbs_steps, Rng &rng,
                                std::span<const Vec> primer)
{
    p.validate();
    if(length < 1)
        throw std::invalid_argument("rtrbm_generate: length must be at least 1");
    if(gibbs_steps < 1)
        throw std::invalid_argument("rtrbm_generate: gibbs_steps must be at least 1");

    Vec u = p.u0;
    Vec v_prev(p.n_visible(), 0.0);
    if(!primer.empty()) {
        u = rtrbm_forward(p, primer).u.back();
        v_prev = primer.back();
    }
    std::vector<Vec> out;
    out.reserve(length);
    for(std::size_t t = 0; t < length; ++t) {
        const auto [bv, bh] = rtrbm_biases(p, u);
        const RbmView cond(p.W, bv, bh);
        Vec v = v_prev;
        for(std::size_t s = 0; s < gibbs_steps; ++s)
            v = rbm::gibbs_step(cond, v, rng).v;
        Vec act = p.b_h;
        matvec_acc(p.W, v, act);
        matvec_acc(p.W_uh, u, act);
        u = sigmoid(act);
        v_prev = v;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<double> frame_log_probs(const RtrbmParams &p, std::span<const Vec> vseq, std::size_t max_bits)
{
    const StateTrajectory traj = rtrbm_forward(p, vseq);
    std::vector<double> ll(vseq.size());
    for(std::size_t t = 0; t < vseq.size(); ++t) {
        std::span<const double> u_prev = t == 0 ? std::span<const double>(p.u0) : traj.u[t - 1];
        const auto [bv, bh] = rtrbm_biases(p, u_prev);
        const RbmView cond(p.W, bv, bh);
        ll[t] = rbm::log_prob(cond, vseq[t], rbm::log_partition(cond, max_bits));
    }
    return ll;
}

} // namespace rtrbm
} // namespace rnndbn
