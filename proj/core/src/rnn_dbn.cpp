#include "rnndbn/rnn_dbn.hpp"

#include <algorithm>
#include <cmath>

namespace rnndbn {

void RnnDbnParams::validate() const
{
    if(W_vh1.rows() == 0 || W_h1h2.rows() == 0 || W_vu.rows() == 0)
        throw ShapeError("RnnDbnParams: empty weight matrix");
    const std::size_t nv = n_visible(), h1 = n_h1(), h2 = n_h2(), nu = n_units();
    require_shape(W_h1h2, h2, h1, "RnnDbnParams W_h1h2");
    require_size(b_v, nv, "RnnDbnParams b_v");
    require_size(b_h1, h1, "RnnDbnParams b_h1");
    require_size(b_h2, h2, "RnnDbnParams b_h2");
    require_shape(W_uv, nv, nu, "RnnDbnParams W_uv");
    require_shape(W_uh1, h1, nu, "RnnDbnParams W_uh1");
    require_shape(W_uh2, h2, nu, "RnnDbnParams W_uh2");
    require_size(u0, nu, "RnnDbnParams u0");
    require_shape(W_vu, nu, nv, "RnnDbnParams W_vu");
    require_shape(W_uu, nu, nu, "RnnDbnParams W_uu");
    require_size(b_u, nu, "RnnDbnParams b_u");
    rnn_dbn::for_each_block(*this, [](std::string_view name, std::span<const double> x) {
        for(double v : x)
            if(!std::isfinite(v))
                throw ShapeError("RnnDbnParams: non-finite entry in " + std::string(name));
    });
}

DbnParams ConditionalDbn::to_dbn() const
{
    return DbnParams({RbmParams{params->W_vh1, biases.b_v, biases.b_h1},
                      RbmParams{params->W_h1h2, biases.b_h1, biases.b_h2}});
}

namespace rnn_dbn {

RnnDbnParams init(std::size_t n_visible, std::size_t n_h1, std::size_t n_h2, std::size_t n_units, Rng &rng)
{
    RnnDbnParams p;
    p.W_vh1 = gaussian_mat(n_h1, n_visible, 0.01, rng);
    p.W_h1h2 = gaussian_mat(n_h2, n_h1, 0.01, rng);
    p.b_v.assign(n_visible, 0.0);
    p.b_h1.assign(n_h1, 0.0);
    p.b_h2.assign(n_h2, 0.0);
    p.W_uv = gaussian_mat(n_visible, n_units, 0.01, rng);
    p.W_uh1 = gaussian_mat(n_h1, n_units, 0.01, rng);
    p.W_uh2 = gaussian_mat(n_h2, n_units, 0.01, rng);
    p.u0.assign(n_units, 0.0);
    p.W_vu = gaussian_mat(n_units, n_visible, 0.01, rng);
    p.W_uu = gaussian_mat(n_units, n_units, 0.01, rng);
    p.b_u.assign(n_units, 0.0);
    return p;
}

RnnDbnGrad zeros_like(const RnnDbnParams &p)
{
    RnnDbnGrad g = p;
    for_each_block(g, [](std::string_view, std::span<double> x) { std::fill(x.begin(), x.end(), 0.0); });
    return g;
}

void for_each_block(RnnDbnParams &p, const std::function<void(std::string_view, std::span<double>)> &f)
{
    f("W_vh1", p.W_vh1.flat());
    f("W_h1h2", p.W_h1h2.flat());
    f("b_v", p.b_v);
    f("b_h1", p.b_h1);
    f("b_h2", p.b_h2);
    f("W_uv", p.W_uv.flat());
    f("W_uh1", p.W_uh1.flat());
    f("W_uh2", p.W_uh2.flat());
    f("u0", p.u0);
    f("W_vu", p.W_vu.flat());
    f("W_uu", p.W_uu.flat());
    f("b_u", p.b_u);
}

void for_each_block(const RnnDbnParams &p, const std::function<void(std::string_view, std::span<const double>)> &f)
{
    f("W_vh1", p.W_vh1.flat());
    f("W_h1h2", p.W_h1h2.flat());
    f("b_v", p.b_v);
    f("b_h1", p.b_h1);
    f("b_h2", p.b_h2);
    f("W_uv", p.W_uv.flat());
    f("W_uh1", p.W_uh1.flat());
    f("W_uh2", p.W_uh2.flat());
    f("u0", p.u0);
    f("W_vu", p.W_vu.flat());
    f("W_uu", p.W_uu.flat());
    f("b_u", p.b_u);
}

std::vector<double> flatten(const RnnDbnParams &p)
{
    std::vector<double> out;
    for_each_block(p, [&out](std::string_view, std::span<const double> x) { out.insert(out.end(), x.begin(), x.end()); });
    return out;
}

void unflatten(std::span<const double> flat, RnnDbnParams &p)
{
    std::size_t offset = 0;
    for_each_block(p, [&](std::string_view, std::span<double> x) {
        if(offset + x.size() > flat.size())
            throw ShapeError("unflatten: vector too short");
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), x.size(), x.begin());
        offset += x.size();
    });
    if(offset != flat.size())
        throw ShapeError("unflatten: vector too long");
}

TimeBiases time_dependent_biases(const RnnDbnParams &p, std::span<const double> u_prev)
{
    require_size(u_prev, p.n_units(), "time_dependent_biases u_prev");
    TimeBiases b{p.b_v, p.b_h1, p.b_h2};
    matvec_acc(p.W_uv, u_prev, b.b_v);
    matvec_acc(p.W_uh1, u_prev, b.b_h1);
    matvec_acc(p.W_uh2, u_prev, b.b_h2);
    return b;
}

StateTrajectory forward_hidden_states(const RnnDbnParams &p, std::span<const Vec> vseq)
{
    for(const auto &v : vseq)
        require_size(v, p.n_visible(), "forward_hidden_states frame");
    return rnn::rnn_forward(rnn::RnnView(p.W_vu, p.W_uu, p.b_u, p.u0), vseq);
}

ConditionalDbn conditional_dbn_at(const RnnDbnParams &p, std::span<const double> u_prev)
{
    return {&p, time_dependent_biases(p, u_prev)};
}

std::vector<ConditionalDbn> conditional_dbns(const RnnDbnParams &p, std::span<const Vec> vseq,
                                             const StateTrajectory &traj)
{
    if(traj.length() != vseq.size())
        throw ShapeError("conditional_dbns: trajectory length differs from sequence");
    std::vector<ConditionalDbn> conds;
    conds.reserve(vseq.size());
    for(std::size_t t = 0; t < vseq.size(); ++t)
        conds.push_back(conditional_dbn_at(p, t == 0 ? std::span<const double>(p.u0) : traj.u[t - 1]));
    return conds;
}

DbnStatisticsFn cd_statistics(std::size_t k, Rng &rng)
{
    if(k < 1)
        throw std::invalid_argument("cd_statistics: k must be at least 1");
    return [k, &rng](std::span<const SequenceFrames> seqs, BatchStats &out) {
        // Layer 1 over the whole batch on raw frames.
        for(std::size_t s = 0; s < seqs.size(); ++s) {
            const auto &sf = seqs[s];
            for(std::size_t t = 0; t < sf.frames.size(); ++t) {
                const RbmView l1 = sf.conds[t].layer1();
                RbmGrad g(l1.n_visible(), l1.n_hidden());
                out.recon_error += rbm::cd_k_accumulate(l1, sf.frames[t], k, rng, g);
                axpy(1.0, g.dW.flat(), out.dW_vh1.flat());
                out.bias[s][t].db_v = std::move(g.db_v);
                out.bias[s][t].db_h1 = std::move(g.db_h);
            }
        }
        // Layer 2 on the layer-1 mean activations.
        for(std::size_t s = 0; s < seqs.size(); ++s) {
            const auto &sf = seqs[s];
            for(std::size_t t = 0; t < sf.frames.size(); ++t) {
                const Vec x = rbm::prob_h_given_v(sf.conds[t].layer1(), sf.frames[t]);
                const RbmView l2 = sf.conds[t].layer2();
                RbmGrad g(l2.n_visible(), l2.n_hidden());
                rbm::cd_k_accumulate(l2, x, k, rng, g);
                axpy(1.0, g.dW.flat(), out.dW_h1h2.flat());
                axpy(1.0, g.db_v, out.bias[s][t].db_h1);
                out.bias[s][t].db_h2 = std::move(g.db_h);
            }
        }
    };
}

RnnDbnGrad gradient(const RnnDbnParams &p, std::span<const std::vector<Vec>> batch, const DbnStatisticsFn &stats,
                    double *recon_error)
{
    p.validate();
    if(batch.empty())
        throw std::invalid_argument("rnn_dbn gradient: empty batch");

    std::vector<StateTrajectory> trajs;
    std::vector<SequenceFrames> seqs;
    trajs.reserve(batch.size());
    seqs.reserve(batch.size());
    for(const auto &seq : batch) {
        if(seq.empty())
            throw std::invalid_argument("rnn_dbn gradient: empty sequence");
        trajs.push_back(forward_hidden_states(p, seq));
        seqs.push_back({seq, conditional_dbns(p, seq, trajs.back())});
    }

    BatchStats st{Mat(p.n_h1(), p.n_visible()), Mat(p.n_h2(), p.n_h1()), {}, 0.0};
    st.bias.resize(batch.size());
    for(std::size_t s = 0; s < batch.size(); ++s)
        st.bias[s].resize(batch[s].size());
    stats(seqs, st);
    if(recon_error)
        *recon_error += st.recon_error;

    RnnDbnGrad g = zeros_like(p);
    axpy(1.0, st.dW_vh1.flat(), g.W_vh1.flat());
    axpy(1.0, st.dW_h1h2.flat(), g.W_h1h2.flat());

    const rnn::RnnView rnn_view(p.W_vu, p.W_uu, p.b_u, p.u0);
    const std::size_t nu = p.n_units();
    for(std::size_t s = 0; s < batch.size(); ++s) {
        const auto &seq = batch[s];
        const auto &traj = trajs[s];
        std::vector<Vec> dL_du(seq.size(), Vec(nu, 0.0));
        for(std::size_t t = 0; t < seq.size(); ++t) {
            const FrameBiasGrad &fb = st.bias[s][t];
            std::span<const double> u_prev = t == 0 ? std::span<const double>(p.u0) : traj.u[t - 1];
            axpy(1.0, fb.db_v, g.b_v);
            axpy(1.0, fb.db_h1, g.b_h1);
            axpy(1.0, fb.db_h2, g.b_h2);
            outer_acc(g.W_uv, fb.db_v, u_prev);
            outer_acc(g.W_uh1, fb.db_h1, u_prev);
            outer_acc(g.W_uh2, fb.db_h2, u_prev);

            std::span<double> ext = t == 0 ? std::span<double>(g.u0) : std::span<double>(dL_du[t - 1]);
            matvec_t_acc(p.W_uv, fb.db_v, ext);
            matvec_t_acc(p.W_uh1, fb.db_h1, ext);
            matvec_t_acc(p.W_uh2, fb.db_h2, ext);
        }
        const RnnGrad r = rnn::bptt_gradients(rnn_view, seq, traj, dL_du);
        axpy(1.0, r.dW_vu.flat(), g.W_vu.flat());
        axpy(1.0, r.dW_uu.flat(), g.W_uu.flat());
        axpy(1.0, r.db_u, g.b_u);
        axpy(1.0, r.du0, g.u0);
    }
    return g;
}

RnnDbnParams apply_update(const RnnDbnParams &p, const RnnDbnGrad &g, double learning_rate)
{
    g.validate();
    const std::vector<double> gf = flatten(g);
    std::vector<double> pf = flatten(p);
    require_size(gf, pf.size(), "rnn_dbn apply_update");
    axpy(learning_rate, gf, pf);
    RnnDbnParams out = p;
    unflatten(pf, out);
    return out;
}

RnnDbnParams train_epoch(const RnnDbnParams &p, std::span<const std::vector<Vec>> dataset, const TrainConfig &cfg,
                         Rng &rng, double *mean_objective)
{
    if(dataset.empty())
        throw std::invalid_argument("rnn_dbn train_epoch: empty dataset");
    cfg.validate();
    std::size_t frames = 0;
    for(const auto &seq : dataset) {
        if(seq.empty())
            throw std::invalid_argument("rnn_dbn train_epoch: empty sequence");
        for(const auto &v : seq)
            require_size(v, p.n_visible(), "rnn_dbn train_epoch frame");
        frames += seq.size();
    }

    const auto order = rng.permutation(dataset.size());
    const DbnStatisticsFn stats = cd_statistics(cfg.cd_k, rng);
    RnnDbnParams cur = p;
    double err = 0.0;
    std::vector<std::vector<Vec>> batch;
    for(std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        batch.clear();
        for(std::size_t i = start; i < end; ++i)
            batch.push_back(dataset[order[i]]);
        RnnDbnGrad g = gradient(cur, batch, stats, &err);
        const double inv = 1.0 / static_cast<double>(batch.size());
        for_each_block(g, [&](std::string_view, std::span<double> x) {
            for(auto &v : x)
                v *= inv;
            if(cfg.clip_threshold)
                clip(x, *cfg.clip_threshold);
        });
        cur = apply_update(cur, g, cfg.learning_rate);
    }
    if(mean_objective)
        *mean_objective = err / static_cast<double>(frames);
    return cur;
}

std::vector<Vec> generate(const RnnDbnParams &p, std::size_t length, std::span<const Vec> primer,
                          const TrainConfig &cfg, Rng &rng)
{
    p.validate();
    cfg.validate();
    if(length < 1)
        throw std::invalid_argument("generate: length must be at least 1");
    for(const auto &v : primer)
        require_size(v, p.n_visible(), "generate primer frame");

    Vec u = p.u0;
    Vec v_prev(p.n_visible(), 0.0);
    if(!primer.empty()) {
        u = forward_hidden_states(p, primer).u.back();
        v_prev = primer.back();
    }

    std::vector<Vec> out;
    out.reserve(length);
    for(std::size_t t = 0; t < length; ++t) {
        const ConditionalDbn cond = conditional_dbn_at(p, u);
        const RbmView l1 = cond.layer1();
        const RbmView l2 = cond.layer2();
        Vec h1 = bernoulli_sample(rbm::prob_h_given_v(l1, v_prev), rng);
        for(std::size_t s = 0; s < cfg.gen_gibbs_steps; ++s)
            h1 = rbm::gibbs_step(l2, h1, rng).v;
        const Vec pv = rbm::prob_v_given_h(l1, h1);
        Vec v = bernoulli_sample(pv, rng);

        Vec act = p.b_u;
        matvec_acc(p.W_vu, cfg.generate_from_mean ? pv : v, act);
        matvec_acc(p.W_uu, u, act);
        u = sigmoid(act);
        v_prev = v;
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

/// log P(v | h1) under layer 1's visible conditional.
double log_visible_given_h1(RbmView l1, std::span<const double> v, std::span<const double> h1)
{
    Vec act(l1.b_v.begin(), l1.b_v.end());
    matvec_t_acc(l1.W, h1, act);
    double s = 0.0;
    for(std::size_t j = 0; j < act.size(); ++j)
        s += v[j] * act[j] - softplus(act[j]);
    return s;
}

double importance_sampled_ll(const ConditionalDbn &cond, std::span<const double> v, double top_log_z,
                             std::size_t samples, Rng &rng)
{
    const RbmView l1 = cond.layer1();
    const RbmView l2 = cond.layer2();
    const Vec q = rbm::prob_h_given_v(l1, v);
    Vec logw(samples);
    for(std::size_t s = 0; s < samples; ++s) {
        const Vec h1 = bernoulli_sample(q, rng);
        double log_q = 0.0;
        for(std::size_t i = 0; i < h1.size(); ++i)
            log_q += std::log(h1[i] == 1.0 ? q[i] : 1.0 - q[i]);
        logw[s] = log_visible_given_h1(l1, v, h1) - rbm::free_energy(l2, h1) - log_q;
    }
    return log_sum_exp(logw) - std::log(static_cast<double>(samples)) - top_log_z;
}

} // namespace

FrameLl frame_conditional_ll(const RnnDbnParams &p, std::span<const Vec> seq, const LlOptions &opts)
{
    p.validate();
    if(seq.empty())
        throw std::invalid_argument("frame_conditional_ll: empty sequence");
    const std::size_t budget = opts.max_enumerated_bits;
    const std::size_t z_bits = std::min(p.n_h1(), p.n_h2());
    const bool exact = p.n_h1() <= budget && z_bits <= budget;
    if(!exact && !(opts.allow_approx && z_bits <= budget))
        throw BudgetError("frame_conditional_ll: model too large for exact evaluation within " +
                          std::to_string(budget) + " enumerated units");
    if(!exact && opts.importance_samples == 0)
        throw std::invalid_argument("frame_conditional_ll: importance_samples must be positive");

    const StateTrajectory traj = forward_hidden_states(p, seq);
    const auto conds = conditional_dbns(p, seq, traj);
    Rng rng(opts.seed);

    FrameLl out;
    out.exact = exact;
    out.per_frame.resize(seq.size());
    double total = 0.0;
    for(std::size_t t = 0; t < seq.size(); ++t) {
        const double top_log_z = rbm::log_partition(conds[t].layer2(), budget);
        if(exact) {
            const RbmView l1 = conds[t].layer1();
            const RbmView l2 = conds[t].layer2();
            const std::uint64_t count = std::uint64_t{1} << p.n_h1();
            Vec terms(count);
            for(std::uint64_t idx = 0; idx < count; ++idx) {
                const Vec h1 = binary_from_index(idx, p.n_h1());
                terms[idx] = log_visible_given_h1(l1, seq[t], h1) - rbm::free_energy(l2, h1);
            }
            out.per_frame[t] = log_sum_exp(terms) - top_log_z;
        } else {
            out.per_frame[t] = importance_sampled_ll(conds[t], seq[t], top_log_z, opts.importance_samples, rng);
        }
        total += out.per_frame[t];
    }
    out.mean = total / static_cast<double>(seq.size());
    return out;
}

} // namespace rnn_dbn
} // namespace rnndbn
