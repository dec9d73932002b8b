#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rnndbn/config.hpp"
#include "rnndbn/rbm.hpp"

namespace rnndbn {

/// Stack of RBMs; layer l's visible width equals layer l-1's hidden width.
/// The constructor rejects stacks that break the chaining.
class DbnParams {
public:
    explicit DbnParams(std::vector<RbmParams> layers);

    /// Small Gaussian weights for widths {n_v, n_h1, ..., n_hL}.
    static DbnParams init(std::span<const std::size_t> widths, Rng &rng);

    std::size_t depth() const noexcept { return layers_.size(); }
    std::size_t n_visible() const noexcept { return layers_.front().n_visible(); }
    std::vector<std::size_t> widths() const;

    const RbmParams &layer(std::size_t l) const { return layers_.at(l); }
    const std::vector<RbmParams> &layers() const noexcept { return layers_; }

    /// Replaces one layer; the new layer must keep the widths.
    void set_layer(std::size_t l, RbmParams p);

    bool operator==(const DbnParams &) const = default;

private:
    std::vector<RbmParams> layers_;
};

enum class PropagationMode { mean, sample };

namespace dbn {

/// representation[0] = v; representation[l] = P(h_l | representation[l-1])
/// or a Bernoulli draw from it.
std::vector<Vec> propagate_up(const DbnParams &d, std::span<const double> v, PropagationMode mode, Rng &rng);

/// Called per epoch with (layer starting at 0, epoch starting at 1, mean reconstruction error).
using LayerEpochCallback = std::function<void(std::size_t, std::size_t, double)>;

/// Greedy layer-wise CD-k: each layer gets cfg.epochs passes on the mean
/// activations of the already-trained layers below, which stay fixed.
DbnParams greedy_train(const DbnParams &d, std::span<const Vec> data, const TrainConfig &cfg, Rng &rng,
                       const LayerEpochCallback &on_epoch = {});

/// Gibbs in the top RBM from a uniform random start, then one Bernoulli
/// draw per layer on the way down.
Vec dbn_sample(const DbnParams &d, std::size_t gibbs_steps, Rng &rng);

/// Exact log p(v) of the generative model: intermediate hidden layers are
/// enumerated, the top RBM's hidden layer is summed analytically, and the
/// top partition function goes over its smaller side. Throws BudgetError
/// when more than max_bits units would be enumerated.
double log_prob(const DbnParams &d, std::span<const double> v, std::size_t max_bits = 24);

/// log Z of the top RBM.
double top_log_partition(const DbnParams &d, std::size_t max_bits = 24);

/// log p(v) given a precomputed top_log_partition.
double log_prob(const DbnParams &d, std::span<const double> v, double top_log_z, std::size_t max_bits);

/// Bits enumerated by log_prob.
std::size_t enumerated_bits(const DbnParams &d);

} // namespace dbn
} // namespace rnndbn
