#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace rnndbn {

/// Hyperparameters shared by every trainer.
struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t cd_k = 1;
    std::size_t epochs = 10;
    std::size_t batch_size = 10;
    std::size_t gen_gibbs_steps = 25;
    /// Elementwise gradient clip; disabled when empty.
    std::optional<double> clip_threshold;
    std::uint64_t seed = 0;
    /// Feed P(v|h1) instead of the sampled frame back into the RNN while generating.
    bool generate_from_mean = false;

    bool operator==(const TrainConfig &) const = default;

    void validate() const
    {
        if(!(learning_rate >= 0.0))
            throw std::invalid_argument("learning_rate must be non-negative");
        if(cd_k < 1)
            throw std::invalid_argument("cd_k must be at least 1");
        if(epochs < 1)
            throw std::invalid_argument("epochs must be at least 1");
        if(batch_size < 1)
            throw std::invalid_argument("batch_size must be at least 1");
        if(gen_gibbs_steps < 1)
            throw std::invalid_argument("gen_gibbs_steps must be at least 1");
        if(clip_threshold && !(*clip_threshold > 0.0))
            throw std::invalid_argument("clip_threshold must be positive");
    }
};

} // namespace rnndbn
