#include "rnndbn/dbn.hpp"

#include <algorithm>

namespace rnndbn {

DbnParams::DbnParams(std::vector<RbmParams> layers) : layers_(std::move(layers))
{
    if(layers_.empty())
        throw ShapeError("DbnParams: at least one layer required");
    for(std::size_t l = 0; l < layers_.size(); ++l) {
        layers_[l].validate();
        if(l > 0 && layers_[l].n_visible() != layers_[l - 1].n_hidden())
            throw ShapeError("DbnParams: layer " + std::to_string(l) + " visible width " +
                             std::to_string(layers_[l].n_visible()) + " does not match layer " +
                             std::to_string(l - 1) + " hidden width " + std::to_string(layers_[l - 1].n_hidden()));
    }
}

DbnParams DbnParams::init(std::span<const std::size_t> widths, Rng &rng)
{
    if(widths.size() < 2)
        throw ShapeError("DbnParams::init: need visible width plus at least one hidden width");
    std::vector<RbmParams> layers;
    for(std::size_t l = 0; l + 1 < widths.size(); ++l)
        layers.push_back(rbm::init(widths[l], widths[l + 1], rng));
    return DbnParams(std::move(layers));
}

std::vector<std::size_t> DbnParams::widths() const
{
    std::vector<std::size_t> w{n_visible()};
    for(const auto &l : layers_)
        w.push_back(l.n_hidden());
    return w;
}

void DbnParams::set_layer(std::size_t l, RbmParams p)
{
    p.validate();
    const auto &old = layers_.at(l);
    if(p.n_visible() != old.n_visible() || p.n_hidden() != old.n_hidden())
        throw ShapeError("DbnParams::set_layer: widths changed");
    layers_[l] = std::move(p);
}

namespace dbn {

std::vector<Vec> propagate_up(const DbnParams &d, std::span<const double> v, PropagationMode mode, Rng &rng)
{
    require_size(v, d.n_visible(), "propagate_up v");
    std::vector<Vec> reps;
    reps.reserve(d.depth() + 1);
    reps.emplace_back(v.begin(), v.end());
    for(const auto &layer : d.layers()) {
        Vec p = rbm::prob_h_given_v(layer, reps.back());
        if(mode == PropagationMode::sample)
            p = bernoulli_sample(p, rng);
        reps.push_back(std::move(p));
    }
    return reps;
}

DbnParams greedy_train(const DbnParams &d, std::span<const Vec> data, const TrainConfig &cfg, Rng &rng,
                       const LayerEpochCallback &on_epoch)
{
    if(data.empty())
        throw std::invalid_argument("greedy_train: empty data");
    cfg.validate();
    for(const auto &v : data)
        require_size(v, d.n_visible(), "greedy_train data");

    DbnParams out = d;
    std::vector<Vec> layer_data(data.begin(), data.end());
    for(std::size_t l = 0; l < out.depth(); ++l) {
        rbm::EpochCallback cb;
        if(on_epoch)
            cb = [&on_epoch, l](std::size_t e, double err) { on_epoch(l, e, err); };
        RbmParams trained = rbm::train(out.layer(l), layer_data, cfg, rng, cb);
        if(l + 1 < out.depth()) {
            for(auto &x : layer_data)
                x = rbm::prob_h_given_v(trained, x);
        }
        out.set_layer(l, std::move(trained));
    }
    return out;
}

Vec dbn_sample(const DbnParams &d, std::size_t gibbs_steps, Rng &rng)
{
    const auto &top = d.layer(d.depth() - 1);
    Vec x = rbm::sample(top, gibbs_steps, rng);
    for(std::size_t l = d.depth() - 1; l-- > 0;)
        x = bernoulli_sample(rbm::prob_v_given_h(d.layer(l), x), rng);
    return x;
}

namespace {

/// log P(x | h) for a binary x under one layer's visible conditional.
double log_visible_conditional(const RbmParams &p, std::span<const double> x, std::span<const double> h)
{
    Vec act(p.b_v.begin(), p.b_v.end());
    matvec_t_acc(p.W, h, act);
    double s = 0.0;
    for(std::size_t j = 0; j < act.size(); ++j)
        s += x[j] * act[j] - softplus(act[j]);
    return s;
}

std::size_t intermediate_bits(const DbnParams &d)
{
    std::size_t bits = 0;
    for(std::size_t l = 0; l + 1 < d.depth(); ++l)
        bits += d.layer(l).n_hidden();
    return bits;
}

} // namespace

std::size_t enumerated_bits(const DbnParams &d)
{
    const auto &top = d.layer(d.depth() - 1);
    return std::max(intermediate_bits(d), std::min(top.n_visible(), top.n_hidden()));
}

double top_log_partition(const DbnParams &d, std::size_t max_bits)
{
    return rbm::log_partition(d.layer(d.depth() - 1), max_bits);
}

double log_prob(const DbnParams &d, std::span<const double> v, double top_log_z, std::size_t max_bits)
{
    require_size(v, d.n_visible(), "dbn log_prob v");
    const auto &top = d.layer(d.depth() - 1);
    if(d.depth() == 1)
        return rbm::log_prob(top, v, top_log_z);

    const std::size_t bits = intermediate_bits(d);
    if(bits > max_bits || bits >= 63)
        throw BudgetError("dbn log_prob: " + std::to_string(bits) + " hidden units exceed enumeration budget of " +
                          std::to_string(max_bits));

    const std::uint64_t count = std::uint64_t{1} << bits;
    Vec terms(count);
    std::vector<Vec> hs(d.depth() - 1);
    for(std::uint64_t idx = 0; idx < count; ++idx) {
        std::size_t offset = 0;
        for(std::size_t l = 0; l + 1 < d.depth(); ++l) {
            const std::size_t w = d.layer(l).n_hidden();
            hs[l] = binary_from_index(idx >> offset, w);
            offset += w;
        }
        double s = log_visible_conditional(d.layer(0), v, hs[0]);
        for(std::size_t l = 1; l + 1 < d.depth(); ++l)
            s += log_visible_conditional(d.layer(l), hs[l - 1], hs[l]);
        s -= rbm::free_energy(top, hs.back());
        terms[idx] = s;
    }
    return log_sum_exp(terms) - top_log_z;
}

double log_prob(const DbnParams &d, std::span<const double> v, std::size_t max_bits)
{
    return log_prob(d, v, top_log_partition(d, max_bits), max_bits);
}

} // namespace dbn
} // namespace rnndbn
