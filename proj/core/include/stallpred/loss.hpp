#pragma once

#include <vector>

#include "stallpred/matrix.hpp"

namespace stallpred {

/// Single-sample binary cross-entropy, probability clamped to
/// [1e-12, 1 - 1e-12] before the log.
double bce_one(double prob, int label);

/// Mean BCE over a batch. Throws std::invalid_argument on empty input or
/// length mismatch.
double bce_loss(const Vector& probs, const std::vector<int>& labels);

}  // namespace stallpred
