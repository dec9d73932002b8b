#include "rnndbn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rnndbn::eval {

namespace {

double logistic(double x)
{
    return 1.0 / (1.0 + std::exp(-x));
}

double log1pexp(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double lse(const std::vector<double> &x)
{
    double m = -std::numeric_limits<double>::infinity();
    for(double v : x)
        m = std::max(m, v);
    double s = 0.0;
    for(double v : x)
        s += std::exp(v - m);
    return m + std::log(s);
}

std::vector<double> unpack(std::uint64_t bits, std::size_t n)
{
    std::vector<double> x(n);
    for(std::size_t i = 0; i < n; ++i)
        x[i] = static_cast<double>((bits >> i) & 1u);
    return x;
}

void check_budget(std::size_t units, EnumBudget budget, const char *what)
{
    if(units > budget.max_total_units || units >= 63)
        throw BudgetError(std::string(what) + ": " + std::to_string(units) +
                          " units exceed enumeration budget of " + std::to_string(budget.max_total_units));
}

/// -E(x, h) for one RBM layer, written out term by term.
double neg_energy(const RbmParams &p, const std::vector<double> &x, const std::vector<double> &h)
{
    double s = 0.0;
    for(std::size_t j = 0; j < x.size(); ++j)
        s += p.b_v[j] * x[j];
    for(std::size_t i = 0; i < h.size(); ++i) {
        if(h[i] == 0.0)
            continue;
        double wi = p.b_h[i];
        for(std::size_t j = 0; j < x.size(); ++j)
            wi += p.W(i, j) * x[j];
        s += wi;
    }
    return s;
}

/// log P(x | h) for a layer's visible conditional.
double log_down(const RbmParams &p, const std::vector<double> &x, const std::vector<double> &h)
{
    double s = 0.0;
    for(std::size_t j = 0; j < x.size(); ++j) {
        double a = p.b_v[j];
        for(std::size_t i = 0; i < h.size(); ++i)
            a += p.W(i, j) * h[i];
        s += x[j] * a - log1pexp(a);
    }
    return s;
}

double top_log_z(const RbmParams &top)
{
    const std::size_t nv = top.n_visible(), nh = top.n_hidden();
    std::vector<double> terms;
    terms.reserve(std::size_t{1} << (nv + nh));
    for(std::uint64_t vi = 0; vi < (std::uint64_t{1} << nv); ++vi) {
        const auto x = unpack(vi, nv);
        for(std::uint64_t hi = 0; hi < (std::uint64_t{1} << nh); ++hi)
            terms.push_back(neg_energy(top, x, unpack(hi, nh)));
    }
    return lse(terms);
}

std::size_t dbn_units(const DbnParams &d)
{
    std::size_t n = d.n_visible();
    for(const auto &l : d.layers())
        n += l.n_hidden();
    return n;
}

/// log p(v) under the DBN joint, enumerating every hidden layer.
double dbn_log_marginal(const DbnParams &d, const std::vector<double> &v, double log_z)
{
    const std::size_t L = d.depth();
    std::size_t hidden_bits = 0;
    for(const auto &l : d.layers())
        hidden_bits += l.n_hidden();

    std::vector<double> terms;
    terms.reserve(std::size_t{1} << hidden_bits);
    std::vector<std::vector<double>> states(L + 1);
    states[0] = v;
    for(std::uint64_t idx = 0; idx < (std::uint64_t{1} << hidden_bits); ++idx) {
        std::size_t off = 0;
        for(std::size_t k = 1; k <= L; ++k) {
            const std::size_t w = d.layer(k - 1).n_hidden();
            states[k] = unpack(idx >> off, w);
            off += w;
        }
        double s = 0.0;
        for(std::size_t k = 0; k + 1 < L; ++k)
            s += log_down(d.layer(k), states[k], states[k + 1]);
        s += neg_energy(d.layer(L - 1), states[L - 1], states[L]);
        terms.push_back(s);
    }
    return lse(terms) - log_z;
}

void check_binary(std::span<const double> v, std::size_t n, const char *what)
{
    if(v.size() != n)
        throw ShapeError(std::string(what) + ": width mismatch");
    for(double x : v)
        if(x != 0.0 && x != 1.0)
            throw std::invalid_argument(std::string(what) + ": data must be binary");
}

} // namespace

double exact_partition_rbm(const RbmParams &p, EnumBudget budget)
{
    p.validate();
    check_budget(p.n_visible() + p.n_hidden(), budget, "exact_partition_rbm");
    return top_log_z(p);
}

double exact_ll_rbm(const RbmParams &p, std::span<const Vec> data, EnumBudget budget)
{
    return exact_ll_dbn(DbnParams({p}), data, budget);
}

std::vector<double> exact_visible_distribution_rbm(const RbmParams &p, EnumBudget budget)
{
    return exact_visible_distribution_dbn(DbnParams({p}), budget);
}

double exact_ll_dbn(const DbnParams &d, std::span<const Vec> data, EnumBudget budget)
{
    if(data.empty())
        throw std::invalid_argument("exact_ll_dbn: empty data");
    check_budget(dbn_units(d), budget, "exact_ll_dbn");
    const double log_z = top_log_z(d.layer(d.depth() - 1));
    double total = 0.0;
    for(const auto &v : data) {
        check_binary(v, d.n_visible(), "exact_ll_dbn");
        total += dbn_log_marginal(d, v, log_z);
    }
    return total / static_cast<double>(data.size());
}

std::vector<double> exact_visible_distribution_dbn(const DbnParams &d, EnumBudget budget)
{
    check_budget(dbn_units(d), budget, "exact_visible_distribution_dbn");
    const double log_z = top_log_z(d.layer(d.depth() - 1));
    const std::size_t nv = d.n_visible();
    std::vector<double> probs(std::size_t{1} << nv);
    for(std::uint64_t vi = 0; vi < probs.size(); ++vi)
        probs[vi] = std::exp(dbn_log_marginal(d, unpack(vi, nv), log_z));
    return probs;
}

ModelExpectations exact_model_expectations(const RbmParams &p, EnumBudget budget)
{
    p.validate();
    const std::size_t nv = p.n_visible(), nh = p.n_hidden();
    check_budget(nv + nh, budget, "exact_model_expectations");
    const double log_z = top_log_z(p);

    ModelExpectations e{Mat(nh, nv), Vec(nv, 0.0), Vec(nh, 0.0)};
    for(std::uint64_t vi = 0; vi < (std::uint64_t{1} << nv); ++vi) {
        const auto v = unpack(vi, nv);
        for(std::uint64_t hi = 0; hi < (std::uint64_t{1} << nh); ++hi) {
            const auto h = unpack(hi, nh);
            const double pr = std::exp(neg_energy(p, v, h) - log_z);
            for(std::size_t j = 0; j < nv; ++j)
                e.v[j] += pr * v[j];
            for(std::size_t i = 0; i < nh; ++i) {
                e.h[i] += pr * h[i];
                for(std::size_t j = 0; j < nv; ++j)
                    e.hv(i, j) += pr * h[i] * v[j];
            }
        }
    }
    return e;
}

DbnGradient exact_dbn_gradient(const RbmParams &layer1, const RbmParams &layer2, std::span<const double> v,
                               EnumBudget budget)
{
    layer1.validate();
    layer2.validate();
    if(layer2.n_visible() != layer1.n_hidden())
        throw ShapeError("exact_dbn_gradient: layer widths do not chain");
    const std::size_t nv = layer1.n_visible(), n1 = layer1.n_hidden(), n2 = layer2.n_hidden();
    check_binary(v, nv, "exact_dbn_gradient");
    check_budget(nv + n1 + n2, budget, "exact_dbn_gradient");
    const std::vector<double> x(v.begin(), v.end());

    // Posterior weights log P(v|h1) - E_top(h1,h2) and top-model weights -E_top.
    const std::size_t states = std::size_t{1} << (n1 + n2);
    std::vector<double> post(states), prior(states);
    for(std::uint64_t idx = 0; idx < states; ++idx) {
        const auto h1 = unpack(idx, n1);
        const auto h2 = unpack(idx >> n1, n2);
        prior[idx] = neg_energy(layer2, h1, h2);
        post[idx] = log_down(layer1, x, h1) + prior[idx];
    }
    const double post_z = lse(post);
    const double prior_z = lse(prior);

    DbnGradient g{Mat(n1, nv), Mat(n2, n1), Vec(nv, 0.0), Vec(n1, 0.0), Vec(n2, 0.0)};
    for(std::uint64_t idx = 0; idx < states; ++idx) {
        const auto h1 = unpack(idx, n1);
        const auto h2 = unpack(idx >> n1, n2);
        const double q = std::exp(post[idx] - post_z);
        const double m = std::exp(prior[idx] - prior_z);
        for(std::size_t j = 0; j < nv; ++j) {
            double a = layer1.b_v[j];
            for(std::size_t i = 0; i < n1; ++i)
                a += layer1.W(i, j) * h1[i];
            const double r = x[j] - logistic(a);
            g.db_v[j] += q * r;
            for(std::size_t i = 0; i < n1; ++i)
                g.dW1(i, j) += q * h1[i] * r;
        }
        const double d = q - m;
        for(std::size_t i = 0; i < n1; ++i)
            g.db_h1[i] += d * h1[i];
        for(std::size_t k = 0; k < n2; ++k) {
            g.db_h2[k] += d * h2[k];
            for(std::size_t i = 0; i < n1; ++i)
                g.dW2(k, i) += d * h2[k] * h1[i];
        }
    }
    return g;
}

double relative_error(double analytic, double numeric)
{
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

GradcheckResult finite_difference_gradcheck(const std::function<double(std::span<const double>)> &objective,
                                            std::span<const double> params, std::span<const double> analytic,
                                            double epsilon)
{
    if(!(epsilon >= 1e-7 && epsilon <= 1e-3))
        throw std::invalid_argument("finite_difference_gradcheck: epsilon must lie in [1e-7, 1e-3]");
    if(analytic.size() != params.size())
        throw ShapeError("finite_difference_gradcheck: analytic gradient size mismatch");

    GradcheckResult res;
    res.numeric.resize(params.size());
    std::vector<double> x(params.begin(), params.end());
    for(std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + epsilon;
        const double fp = objective(x);
        x[i] = orig - epsilon;
        const double fm = objective(x);
        x[i] = orig;
        if(!std::isfinite(fp) || !std::isfinite(fm))
            throw std::domain_error("finite_difference_gradcheck: objective is not finite");
        res.numeric[i] = (fp - fm) / (2.0 * epsilon);
        const double err = relative_error(analytic[i], res.numeric[i]);
        if(err > res.max_rel_error) {
            res.max_rel_error = err;
            res.worst_index = i;
        }
    }
    return res;
}

double empirical_tv_distance(const std::function<Vec()> &sampler, std::span<const double> exact,
                             std::size_t n_samples)
{
    if(exact.size() > (std::size_t{1} << 12) || exact.empty() || (exact.size() & (exact.size() - 1)) != 0)
        throw std::invalid_argument("empirical_tv_distance: table must cover 1..12 binary units");
    if(n_samples == 0)
        throw std::invalid_argument("empirical_tv_distance: n_samples must be positive");
    std::size_t width = 0;
    while((std::size_t{1} << width) < exact.size())
        ++width;

    std::vector<std::size_t> counts(exact.size(), 0);
    for(std::size_t s = 0; s < n_samples; ++s) {
        const Vec v = sampler();
        if(v.size() != width)
            throw ShapeError("empirical_tv_distance: sample width mismatch");
        std::size_t idx = 0;
        for(std::size_t j = 0; j < width; ++j)
            if(v[j] == 1.0)
                idx |= std::size_t{1} << j;
        ++counts[idx];
    }
    double tv = 0.0;
    for(std::size_t i = 0; i < exact.size(); ++i)
        tv += std::abs(static_cast<double>(counts[i]) / static_cast<double>(n_samples) - exact[i]);
    return 0.5 * tv;
}

} // namespace rnndbn::eval
