#include "rnndbn/rbm.hpp"

#include <cmath>
#include <limits>

namespace rnndbn {

namespace {

void require_unit_interval(std::span<const double> x, const char *what)
{
    for(double v : x)
        if(!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument(std::string(what) + ": entries must lie in [0, 1]");
}

void require_finite(std::span<const double> x, const char *what)
{
    for(double v : x)
        if(!std::isfinite(v))
            throw ShapeError(std::string(what) + ": non-finite entry");
}

} // namespace

void RbmParams::validate() const
{
    if(W.rows() == 0 || W.cols() == 0)
        throw ShapeError("RbmParams: empty weight matrix");
    require_size(b_v, W.cols(), "RbmParams b_v");
    require_size(b_h, W.rows(), "RbmParams b_h");
    require_finite(W.flat(), "RbmParams W");
    require_finite(b_v, "RbmParams b_v");
    require_finite(b_h, "RbmParams b_h");
}

RbmView::RbmView(const Mat &w, std::span<const double> bv, std::span<const double> bh) : W(w), b_v(bv), b_h(bh)
{
    require_size(b_v, W.cols(), "RbmView b_v");
    require_size(b_h, W.rows(), "RbmView b_h");
}

RbmGrad::RbmGrad(std::size_t n_visible, std::size_t n_hidden)
    : dW(n_hidden, n_visible), db_v(n_visible, 0.0), db_h(n_hidden, 0.0)
{
}

RbmGrad &RbmGrad::operator+=(const RbmGrad &o)
{
    require_shape(o.dW, dW.rows(), dW.cols(), "RbmGrad +=");
    axpy(1.0, o.dW.flat(), dW.flat());
    axpy(1.0, o.db_v, db_v);
    axpy(1.0, o.db_h, db_h);
    return *this;
}

void RbmGrad::scale(double s)
{
    for(auto &x : dW.flat())
        x *= s;
    for(auto &x : db_v)
        x *= s;
    for(auto &x : db_h)
        x *= s;
}

void RbmGrad::clip(double threshold)
{
    rnndbn::clip(dW.flat(), threshold);
    rnndbn::clip(db_v, threshold);
    rnndbn::clip(db_h, threshold);
}

Vec binary_from_index(std::uint64_t index, std::size_t n)
{
    Vec v(n);
    for(std::size_t j = 0; j < n; ++j)
        v[j] = ((index >> j) & 1u) != 0 ? 1.0 : 0.0;
    return v;
}

std::uint64_t index_from_binary(std::span<const double> v)
{
    std::uint64_t idx = 0;
    for(std::size_t j = 0; j < v.size(); ++j) {
        if(v[j] == 1.0)
            idx |= std::uint64_t{1} << j;
        else if(v[j] != 0.0)
            throw std::invalid_argument("index_from_binary: entries must be 0 or 1");
    }
    return idx;
}

namespace rbm {

RbmParams init(std::size_t n_visible, std::size_t n_hidden, Rng &rng)
{
    return {gaussian_mat(n_hidden, n_visible, 0.01, rng), Vec(n_visible, 0.0), Vec(n_hidden, 0.0)};
}

double energy(RbmView p, std::span<const double> v, std::span<const double> h)
{
    require_size(v, p.n_visible(), "energy v");
    require_size(h, p.n_hidden(), "energy h");
    const Vec wv = matvec(p.W, v);
    return -dot(p.b_v, v) - dot(p.b_h, h) - dot(h, wv);
}

double free_energy(RbmView p, std::span<const double> v)
{
    require_size(v, p.n_visible(), "free_energy v");
    Vec act(p.b_h.begin(), p.b_h.end());
    matvec_acc(p.W, v, act);
    double f = -dot(p.b_v, v);
    for(double a : act)
        f -= softplus(a);
    return f;
}

double hidden_free_energy(RbmView p, std::span<const double> h)
{
    require_size(h, p.n_hidden(), "hidden_free_energy h");
    Vec act(p.b_v.begin(), p.b_v.end());
    matvec_t_acc(p.W, h, act);
    double f = -dot(p.b_h, h);
    for(double a : act)
        f -= softplus(a);
    return f;
}

Vec prob_h_given_v(RbmView p, std::span<const double> v)
{
    require_size(v, p.n_visible(), "prob_h_given_v v");
    Vec act(p.b_h.begin(), p.b_h.end());
    matvec_acc(p.W, v, act);
    return sigmoid(act);
}

Vec prob_v_given_h(RbmView p, std::span<const double> h)
{
    require_size(h, p.n_hidden(), "prob_v_given_h h");
    Vec act(p.b_v.begin(), p.b_v.end());
    matvec_t_acc(p.W, h, act);
    return sigmoid(act);
}

GibbsSample gibbs_step(RbmView p, std::span<const double> v, Rng &rng)
{
    GibbsSample s;
    s.h = bernoulli_sample(prob_h_given_v(p, v), rng);
    s.v = bernoulli_sample(prob_v_given_h(p, s.h), rng);
    return s;
}

double cd_k_accumulate(RbmView p, std::span<const double> v, std::size_t k, Rng &rng, RbmGrad &acc)
{
    if(k < 1)
        throw std::invalid_argument("cd_k: k must be at least 1");
    require_size(v, p.n_visible(), "cd_k input");
    require_unit_interval(v, "cd_k input");
    require_shape(acc.dW, p.n_hidden(), p.n_visible(), "cd_k accumulator");

    const Vec ph0 = prob_h_given_v(p, v);
    Vec vk(v.begin(), v.end());
    for(std::size_t step = 0; step < k; ++step)
        vk = gibbs_step(p, vk, rng).v;
    const Vec phk = prob_h_given_v(p, vk);

    const std::size_t nv = p.n_visible();
    for(std::size_t i = 0; i < p.n_hidden(); ++i) {
        auto row = acc.dW.row(i);
        for(std::size_t j = 0; j < nv; ++j)
            row[j] += ph0[i] * v[j] - phk[i] * vk[j];
        acc.db_h[i] += ph0[i] - phk[i];
    }
    double err = 0.0;
    for(std::size_t j = 0; j < nv; ++j) {
        acc.db_v[j] += v[j] - vk[j];
        err += (v[j] - vk[j]) * (v[j] - vk[j]);
    }
    return err;
}

RbmGrad cd_k_gradient(RbmView p, std::span<const Vec> batch, std::size_t k, Rng &rng, double &recon_error)
{
    if(batch.empty())
        throw std::invalid_argument("cd_k_gradient: empty batch");
    if(k < 1)
        throw std::invalid_argument("cd_k_gradient: k must be at least 1");
    RbmGrad g(p.n_visible(), p.n_hidden());
    recon_error = 0.0;
    for(const auto &v : batch)
        recon_error += cd_k_accumulate(p, v, k, rng, g);
    g.scale(1.0 / static_cast<double>(batch.size()));
    return g;
}

RbmGrad cd_k_gradient(RbmView p, std::span<const Vec> batch, std::size_t k, Rng &rng)
{
    double unused = 0.0;
    return cd_k_gradient(p, batch, k, rng, unused);
}

RbmParams apply_update(const RbmParams &p, const RbmGrad &g, double learning_rate)
{
    require_shape(g.dW, p.n_hidden(), p.n_visible(), "apply_update dW");
    require_size(g.db_v, p.n_visible(), "apply_update db_v");
    require_size(g.db_h, p.n_hidden(), "apply_update db_h");
    RbmParams out = p;
    axpy(learning_rate, g.dW.flat(), out.W.flat());
    axpy(learning_rate, g.db_v, out.b_v);
    axpy(learning_rate, g.db_h, out.b_h);
    return out;
}

double log_partition(RbmView p, std::size_t max_bits)
{
    const bool over_hidden = p.n_hidden() <= p.n_visible();
    const std::size_t bits = over_hidden ? p.n_hidden() : p.n_visible();
    if(bits > max_bits || bits >= 63)
        throw BudgetError("log_partition: " + std::to_string(bits) + " units exceed enumeration budget of " +
                          std::to_string(max_bits));
    const std::uint64_t count = std::uint64_t{1} << bits;
    Vec terms(count);
    for(std::uint64_t idx = 0; idx < count; ++idx) {
        const Vec s = binary_from_index(idx, bits);
        terms[idx] = over_hidden ? -hidden_free_energy(p, s) : -free_energy(p, s);
    }
    return log_sum_exp(terms);
}

double log_prob(RbmView p, std::span<const double> v, double log_z)
{
    return -free_energy(p, v) - log_z;
}

Vec sample(RbmView p, std::size_t gibbs_steps, Rng &rng)
{
    if(gibbs_steps < 1)
        throw std::invalid_argument("sample: gibbs_steps must be at least 1");
    Vec v = random_binary(p.n_visible(), rng);
    for(std::size_t s = 0; s < gibbs_steps; ++s)
        v = gibbs_step(p, v, rng).v;
    return v;
}

RbmParams train_epoch(const RbmParams &p, std::span<const Vec> data, const TrainConfig &cfg, Rng &rng,
                      double *mean_recon_error)
{
    if(data.empty())
        throw std::invalid_argument("train_epoch: empty data");
    cfg.validate();
    const auto order = rng.permutation(data.size());
    RbmParams cur = p;
    double total_err = 0.0;
    std::vector<Vec> batch;
    for(std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        batch.clear();
        for(std::size_t i = start; i < end; ++i)
            batch.push_back(data[order[i]]);
        double err = 0.0;
        RbmGrad g = cd_k_gradient(cur, batch, cfg.cd_k, rng, err);
        total_err += err;
        if(cfg.clip_threshold)
            g.clip(*cfg.clip_threshold);
        cur = apply_update(cur, g, cfg.learning_rate);
    }
    if(mean_recon_error)
        *mean_recon_error = total_err / static_cast<double>(data.size());
    return cur;
}

RbmParams train(RbmParams p, std::span<const Vec> data, const TrainConfig &cfg, Rng &rng,
                const EpochCallback &on_epoch)
{
    for(std::size_t e = 1; e <= cfg.epochs; ++e) {
        double err = 0.0;
        p = train_epoch(p, data, cfg, rng, &err);
        if(on_epoch)
            on_epoch(e, err);
    }
    return p;
}

} // namespace rbm
} // namespace rnndbn
