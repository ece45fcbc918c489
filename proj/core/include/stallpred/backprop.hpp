#pragma once

#include "stallpred/model.hpp"

namespace stallpred {

/// Gradient of the single-sample BCE loss wrt every parameter tensor,
/// backpropagated through the recorded trace (shared LSTM weights accumulate
/// across all timesteps). Adds into `grads`, so batch members sum naturally;
/// zero it first for a fresh gradient.
///
/// The output unit's gradient uses the fused sigmoid+BCE form dL/dz = p - y,
/// so a label equal to the predicted probability yields exactly zero.
void model_backward_into(const Model& m, const ForwardTrace& trace, double label,
                         ParamSet& grads);

ParamSet model_backward(const Model& m, const ForwardTrace& trace, double label);

/// Central finite differences (loss at +/-eps per scalar) with the dropout
/// masks held fixed. Independent of the analytic path; used as its oracle.
/// eps <= 0 throws std::invalid_argument.
ParamSet finite_diff_gradients(const Model& m, const Matrix& window, double label,
                               const DropoutMasks& masks, double eps);

/// max over scalars of |a - b| / max(|a|, |b|, 1e-8)
double max_rel_error(const ParamSet& a, const ParamSet& b);

/// Analytic-vs-central-difference comparison on one sample; returns the max
/// relative error. Meant for small models (cost is 2 forwards per scalar).
double grad_check(const Model& m, const Matrix& window, double label, double eps,
                  std::uint64_t mask_seed = 0);

}  // namespace stallpred
