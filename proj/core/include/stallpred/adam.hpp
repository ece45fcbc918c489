#pragma once

#include <cstdint>

#include "stallpred/model.hpp"

namespace stallpred {

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    bool shuffle = true;
    // Logical gradient streams per batch. The sample->stream assignment and
    // the reduction order are fixed by this value alone, so results are
    // reproducible for a given thread count even on different machines.
    std::size_t threads = 1;
};

void validate(const TrainConfig& cfg);  // throws std::invalid_argument

/// First/second moment estimates mirroring the parameter tensors.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t t = 0;
};

AdamState make_adam_state(const ParamSet& params);

/// One Kingma-Ba update with bias correction:
///   m <- b1 m + (1-b1) g        v <- b2 v + (1-b2) g^2
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
/// Throws NumericError naming the offending tensor if a gradient is
/// non-finite.
void adam_step(AdamState& state, ParamSet& params, const ParamSet& grads,
               const TrainConfig& cfg);

}  // namespace stallpred
