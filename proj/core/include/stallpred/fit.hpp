#pragma once

#include <string>

#include "stallpred/adam.hpp"
#include "stallpred/backprop.hpp"
#include "stallpred/windows.hpp"

namespace stallpred {

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
};

/// "epoch,train_loss,val_loss,val_accuracy" rows, epoch 1-based.
std::string history_to_csv(const TrainHistory& hist);

std::vector<int> labels_of(const Dataset& ds);

/// Mini-batch Adam training, in place, for exactly cfg.epochs epochs (no
/// early stopping). The training set is reshuffled each epoch from a
/// per-epoch stream of cfg.seed; dropout masks are resampled per sample per
/// epoch and shared between a forward pass and its backward pass. Batch loss
/// and gradients are means over the batch, with the final partial batch
/// included.
///
/// Bit-reproducible given (cfg.seed, dataset order, cfg.threads).
///
/// Throws std::invalid_argument on an empty dataset and NumericError
/// (reporting the epoch) when the loss turns non-finite.
TrainHistory fit(Model& m, const Dataset& train, const Dataset& val, const TrainConfig& cfg);

/// Inference-mode probability per sample. Deterministic regardless of the
/// thread count (threads only partition the sample axis).
Vector predict_probs(const Model& m, const Dataset& ds, std::size_t threads = 1);

}  // namespace stallpred
