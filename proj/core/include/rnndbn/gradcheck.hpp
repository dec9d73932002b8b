#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rnndbn/eval.hpp"
#include "rnndbn/rnn_dbn.hpp"
#include "rnndbn/rtrbm.hpp"

namespace rnndbn::gradcheck {

/// Exact per-frame statistics for a conditional RBM: P(h|v) v^T minus the
/// enumerated model expectations.
FrameGradientFn exact_frame_gradient(eval::EnumBudget budget = {});

/// Exact per-frame statistics for the conditional two-layer DBN: the true
/// gradient of log p(v | history) from full enumeration.
DbnStatisticsFn exact_dbn_statistics(eval::EnumBudget budget = {});

struct Report {
    std::string model;
    double max_rel_error = 0.0;
    double threshold = 0.0;
    /// Worst relative error within each named parameter block.
    std::vector<std::pair<std::string, double>> blocks;

    bool passed() const { return max_rel_error < threshold; }
};

inline constexpr double kRbmThreshold = 1e-5;
inline constexpr double kRnnThreshold = 1e-6;
inline constexpr double kRtrbmThreshold = 1e-4;
inline constexpr double kRnnDbnThreshold = 1e-4;

/// n_v=4, n_h=3 RBM: exact log-likelihood gradient vs central differences.
Report rbm_gradcheck(std::uint64_t seed, double epsilon = 1e-5);
/// n_v=3, n_u=4, T=6 RNN with loss sum_t |u(t)|^2 / 2: BPTT vs central differences.
Report rnn_gradcheck(std::uint64_t seed, double epsilon = 1e-5);
/// n_v=3, n_h=3, T=4 RTRBM: exact objective sum_t log p(v(t) | history).
Report rtrbm_gradcheck(std::uint64_t seed, double epsilon = 1e-5);
/// n_v=4, n_h1=3, n_h2=3, n_u=3, T=5 RNN-DBN over all twelve parameter blocks.
Report rnn_dbn_gradcheck(std::uint64_t seed, double epsilon = 1e-5);

} // namespace rnndbn::gradcheck
