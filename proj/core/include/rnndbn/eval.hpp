#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rnndbn/dbn.hpp"
#include "rnndbn/numerics.hpp"
#include "rnndbn/rbm.hpp"

// Brute-force oracles. Everything here is written directly from the energy
// function and shares no probability code with the model modules, so the
// two can be checked against each other.

namespace rnndbn::eval {

struct EnumBudget {
    /// Cap on visible plus hidden units summed over a full enumeration.
    std::size_t max_total_units = 24;
};

/// log sum_{v,h} exp(-E(v,h)) by enumerating every joint state.
double exact_partition_rbm(const RbmParams &p, EnumBudget budget = {});

/// Mean over data of log p(v), with the hidden sum also enumerated.
double exact_ll_rbm(const RbmParams &p, std::span<const Vec> data, EnumBudget budget = {});

/// p(v) for every visible configuration, indexed by binary_from_index order.
std::vector<double> exact_visible_distribution_rbm(const RbmParams &p, EnumBudget budget = {});

/// Mean over data of log p(v) for the directed-plus-top-RBM joint, summing
/// every hidden layer by enumeration.
double exact_ll_dbn(const DbnParams &d, std::span<const Vec> data, EnumBudget budget = {});

/// Visible marginal of a DBN, indexed like exact_visible_distribution_rbm.
std::vector<double> exact_visible_distribution_dbn(const DbnParams &d, EnumBudget budget = {});

struct ModelExpectations {
    Mat hv; ///< E[h_i v_j], n_h x n_v
    Vec v;  ///< E[v_j]
    Vec h;  ///< E[h_i]
};

/// Sufficient statistics under the model distribution.
ModelExpectations exact_model_expectations(const RbmParams &p, EnumBudget budget = {});

/// Exact ascent direction of log p(v) for a two-layer DBN, summing over
/// both hidden layers for the posterior and the top-RBM expectations.
struct DbnGradient {
    Mat dW1;
    Mat dW2;
    Vec db_v;
    Vec db_h1;
    Vec db_h2;
};
DbnGradient exact_dbn_gradient(const RbmParams &layer1, const RbmParams &layer2, std::span<const double> v,
                               EnumBudget budget = {});

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

struct GradcheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    std::vector<double> numeric;
};

/// Central differences of objective around params, compared against the
/// supplied analytic gradient coordinate by coordinate. epsilon must lie
/// in [1e-7, 1e-3].
GradcheckResult finite_difference_gradcheck(const std::function<double(std::span<const double>)> &objective,
                                            std::span<const double> params, std::span<const double> analytic,
                                            double epsilon);

/// (1/2) sum_v |empirical(v) - exact(v)| over n_samples draws; the table
/// covers at most 12 visible units.
double empirical_tv_distance(const std::function<Vec()> &sampler, std::span<const double> exact,
                             std::size_t n_samples);

} // namespace rnndbn::eval
