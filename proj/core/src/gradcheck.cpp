#include "rnndbn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace rnndbn::gradcheck {

namespace {

constexpr double kParamScale = 0.7;

Mat random_mat(std::size_t rows, std::size_t cols, Rng &rng)
{
    return gaussian_mat(rows, cols, kParamScale, rng);
}

Vec random_vec(std::size_t n, Rng &rng)
{
    Vec v(n);
    for(auto &x : v)
        x = rng.normal(0.0, kParamScale);
    return v;
}

Vec random_unit_interval(std::size_t n, Rng &rng)
{
    Vec v(n);
    for(auto &x : v)
        x = 0.05 + 0.9 * rng.uniform();
    return v;
}

std::vector<Vec> random_frames(std::size_t count, std::size_t width, Rng &rng)
{
    std::vector<Vec> out;
    for(std::size_t i = 0; i < count; ++i)
        out.push_back(random_binary(width, rng));
    return out;
}

using Blocks = std::vector<std::pair<std::string, std::size_t>>;

Report summarize(std::string model, double threshold, const eval::GradcheckResult &r,
                 std::span<const double> analytic, const Blocks &blocks)
{
    Report rep{std::move(model), r.max_rel_error, threshold, {}};
    std::size_t offset = 0;
    for(const auto &[name, size] : blocks) {
        double worst = 0.0;
        for(std::size_t i = offset; i < offset + size; ++i)
            worst = std::max(worst, eval::relative_error(analytic[i], r.numeric[i]));
        rep.blocks.emplace_back(name, worst);
        offset += size;
    }
    return rep;
}

void append(std::vector<double> &dst, std::span<const double> src)
{
    dst.insert(dst.end(), src.begin(), src.end());
}

/// Reads `size` values starting at offset into dst.
void take(std::span<const double> flat, std::size_t &offset, std::span<double> dst)
{
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
    offset += dst.size();
}

Vec sigmoid_layer(const Mat &W, std::span<const double> x, const Mat &R, std::span<const double> u,
                  std::span<const double> b)
{
    Vec out(b.size());
    for(std::size_t i = 0; i < b.size(); ++i) {
        double a = b[i];
        for(std::size_t j = 0; j < x.size(); ++j)
            a += W(i, j) * x[j];
        for(std::size_t j = 0; j < u.size(); ++j)
            a += R(i, j) * u[j];
        out[i] = 1.0 / (1.0 + std::exp(-a));
    }
    return out;
}

Vec shifted(std::span<const double> b, const Mat &W, std::span<const double> u)
{
    Vec out(b.begin(), b.end());
    for(std::size_t i = 0; i < out.size(); ++i)
        for(std::size_t j = 0; j < u.size(); ++j)
            out[i] += W(i, j) * u[j];
    return out;
}

} // namespace

FrameGradientFn exact_frame_gradient(eval::EnumBudget budget)
{
    return [budget](RbmView p, std::span<const double> v) {
        const RbmParams owned{p.W, Vec(p.b_v.begin(), p.b_v.end()), Vec(p.b_h.begin(), p.b_h.end())};
        const eval::ModelExpectations e = eval::exact_model_expectations(owned, budget);
        const Vec ph = rbm::prob_h_given_v(p, v);
        RbmGrad g(p.n_visible(), p.n_hidden());
        for(std::size_t i = 0; i < p.n_hidden(); ++i) {
            for(std::size_t j = 0; j < p.n_visible(); ++j)
                g.dW(i, j) = ph[i] * v[j] - e.hv(i, j);
            g.db_h[i] = ph[i] - e.h[i];
        }
        for(std::size_t j = 0; j < p.n_visible(); ++j)
            g.db_v[j] = v[j] - e.v[j];
        return g;
    };
}

DbnStatisticsFn exact_dbn_statistics(eval::EnumBudget budget)
{
    return [budget](std::span<const SequenceFrames> seqs, BatchStats &out) {
        for(std::size_t s = 0; s < seqs.size(); ++s) {
            for(std::size_t t = 0; t < seqs[s].frames.size(); ++t) {
                const ConditionalDbn &c = seqs[s].conds[t];
                const RbmParams l1{c.params->W_vh1, c.biases.b_v, c.biases.b_h1};
                const RbmParams l2{c.params->W_h1h2, c.biases.b_h1, c.biases.b_h2};
                eval::DbnGradient g = eval::exact_dbn_gradient(l1, l2, seqs[s].frames[t], budget);
                axpy(1.0, g.dW1.flat(), out.dW_vh1.flat());
                axpy(1.0, g.dW2.flat(), out.dW_h1h2.flat());
                out.bias[s][t] = {std::move(g.db_v), std::move(g.db_h1), std::move(g.db_h2)};
            }
        }
    };
}

Report rbm_gradcheck(std::uint64_t seed, double epsilon)
{
    Rng rng(seed);
    const std::size_t nv = 4, nh = 3;
    const RbmParams p{random_mat(nh, nv, rng), random_vec(nv, rng), random_vec(nh, rng)};
    const std::vector<Vec> data = random_frames(6, nv, rng);

    // Analytic: mean positive statistics minus exact model expectations.
    const auto frame_grad = exact_frame_gradient();
    RbmGrad g(nv, nh);
    for(const auto &v : data)
        g += frame_grad(p, v);
    g.scale(1.0 / static_cast<double>(data.size()));

    std::vector<double> flat, analytic;
    append(flat, p.W.flat());
    append(flat, p.b_v);
    append(flat, p.b_h);
    append(analytic, g.dW.flat());
    append(analytic, g.db_v);
    append(analytic, g.db_h);

    const auto objective = [&](std::span<const double> x) {
        RbmParams q = p;
        std::size_t off = 0;
        take(x, off, q.W.flat());
        take(x, off, q.b_v);
        take(x, off, q.b_h);
        return eval::exact_ll_rbm(q, data);
    };
    const auto r = eval::finite_difference_gradcheck(objective, flat, analytic, epsilon);
    return summarize("rbm", kRbmThreshold, r, analytic, {{"W", nv * nh}, {"b_v", nv}, {"b_h", nh}});
}

Report rnn_gradcheck(std::uint64_t seed, double epsilon)
{
    Rng rng(seed);
    const std::size_t nv = 3, nu = 4, T = 6;
    const RnnParams p{random_mat(nu, nv, rng), random_mat(nu, nu, rng), random_vec(nu, rng),
                      random_unit_interval(nu, rng)};
    const std::vector<Vec> vseq = random_frames(T, nv, rng);

    const StateTrajectory traj = rnn::rnn_forward(p, vseq);
    // L = sum_t |u(t)|^2 / 2, so dL/du(t) = u(t).
    const RnnGrad g = rnn::bptt_gradients(p, vseq, traj, traj.u);

    std::vector<double> flat, analytic;
    append(flat, p.W_vu.flat());
    append(flat, p.W_uu.flat());
    append(flat, p.b_u);
    append(flat, p.u0);
    append(analytic, g.dW_vu.flat());
    append(analytic, g.dW_uu.flat());
    append(analytic, g.db_u);
    append(analytic, g.du0);

    const auto objective = [&](std::span<const double> x) {
        RnnParams q = p;
        std::size_t off = 0;
        take(x, off, q.W_vu.flat());
        take(x, off, q.W_uu.flat());
        take(x, off, q.b_u);
        take(x, off, q.u0);
        double loss = 0.0;
        Vec u = q.u0;
        for(const auto &v : vseq) {
            u = sigmoid_layer(q.W_vu, v, q.W_uu, u, q.b_u);
            for(double ui : u)
                loss += 0.5 * ui * ui;
        }
        return loss;
    };
    const auto r = eval::finite_difference_gradcheck(objective, flat, analytic, epsilon);
    return summarize("rnn", kRnnThreshold, r, analytic,
                     {{"W_vu", nu * nv}, {"W_uu", nu * nu}, {"b_u", nu}, {"u0", nu}});
}

Report rtrbm_gradcheck(std::uint64_t seed, double epsilon)
{
    Rng rng(seed);
    const std::size_t nv = 3, nh = 3, T = 4;
    RtrbmParams p;
    p.W = random_mat(nh, nv, rng);
    p.b_v = random_vec(nv, rng);
    p.b_h = random_vec(nh, rng);
    p.W_uv = random_mat(nv, nh, rng);
    p.W_uh = random_mat(nh, nh, rng);
    p.u0 = random_unit_interval(nh, rng);
    const std::vector<Vec> vseq = random_frames(T, nv, rng);

    const RtrbmGrad g = rtrbm::rtrbm_gradient(p, vseq, exact_frame_gradient());

    const auto pack = [](const RtrbmParams &q) {
        std::vector<double> f;
        append(f, q.W.flat());
        append(f, q.b_v);
        append(f, q.b_h);
        append(f, q.W_uv.flat());
        append(f, q.W_uh.flat());
        append(f, q.u0);
        return f;
    };
    const std::vector<double> flat = pack(p);
    const std::vector<double> analytic = pack(g);

    const auto objective = [&](std::span<const double> x) {
        RtrbmParams q = p;
        std::size_t off = 0;
        take(x, off, q.W.flat());
        take(x, off, q.b_v);
        take(x, off, q.b_h);
        take(x, off, q.W_uv.flat());
        take(x, off, q.W_uh.flat());
        take(x, off, q.u0);
        double ll = 0.0;
        Vec u = q.u0;
        for(const auto &v : vseq) {
            const RbmParams cond{q.W, shifted(q.b_v, q.W_uv, u), shifted(q.b_h, q.W_uh, u)};
            ll += eval::exact_ll_rbm(cond, std::span<const Vec>(&v, 1));
            u = sigmoid_layer(q.W, v, q.W_uh, u, q.b_h);
        }
        return ll;
    };
    const auto r = eval::finite_difference_gradcheck(objective, flat, analytic, epsilon);
    return summarize("rtrbm", kRtrbmThreshold, r, analytic,
                     {{"W", nh * nv}, {"b_v", nv}, {"b_h", nh}, {"W_uv", nv * nh}, {"W_uh", nh * nh}, {"u0", nh}});
}

Report rnn_dbn_gradcheck(std::uint64_t seed, double epsilon)
{
    Rng rng(seed);
    const std::size_t nv = 4, n1 = 3, n2 = 3, nu = 3, T = 5;
    RnnDbnParams p;
    p.W_vh1 = random_mat(n1, nv, rng);
    p.W_h1h2 = random_mat(n2, n1, rng);
    p.b_v = random_vec(nv, rng);
    p.b_h1 = random_vec(n1, rng);
    p.b_h2 = random_vec(n2, rng);
    p.W_uv = random_mat(nv, nu, rng);
    p.W_uh1 = random_mat(n1, nu, rng);
    p.W_uh2 = random_mat(n2, nu, rng);
    p.u0 = random_unit_interval(nu, rng);
    p.W_vu = random_mat(nu, nv, rng);
    p.W_uu = random_mat(nu, nu, rng);
    p.b_u = random_vec(nu, rng);
    const std::vector<std::vector<Vec>> batch{random_frames(T, nv, rng)};

    const RnnDbnGrad g = rnn_dbn::gradient(p, batch, exact_dbn_statistics());
    const std::vector<double> flat = rnn_dbn::flatten(p);
    const std::vector<double> analytic = rnn_dbn::flatten(g);

    const auto objective = [&](std::span<const double> x) {
        RnnDbnParams q = p;
        rnn_dbn::unflatten(x, q);
        double ll = 0.0;
        Vec u = q.u0;
        for(const auto &v : batch.front()) {
            const Vec bh1 = shifted(q.b_h1, q.W_uh1, u);
            const DbnParams d({RbmParams{q.W_vh1, shifted(q.b_v, q.W_uv, u), bh1},
                               RbmParams{q.W_h1h2, bh1, shifted(q.b_h2, q.W_uh2, u)}});
            ll += eval::exact_ll_dbn(d, std::span<const Vec>(&v, 1));
            u = sigmoid_layer(q.W_vu, v, q.W_uu, u, q.b_u);
        }
        return ll;
    };
    const auto r = eval::finite_difference_gradcheck(objective, flat, analytic, epsilon);

    Blocks blocks;
    rnn_dbn::for_each_block(p, [&blocks](std::string_view name, std::span<const double> x) {
        blocks.emplace_back(std::string(name), x.size());
    });
    return summarize("rnn-dbn", kRnnDbnThreshold, r, analytic, blocks);
}

} // namespace rnndbn::gradcheck
