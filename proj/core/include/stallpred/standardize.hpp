#pragma once

#include "stallpred/windows.hpp"

namespace stallpred {

/// Per-feature affine rescale x' = (x - mean) / stddev, fitted on the
/// training split only and applied unchanged to val/test.
struct Standardizer {
    Vector mean;    // one entry per feature
    Vector stddev;  // population (1/N) standard deviation, floored
    double sigma_floor = 1e-8;
};

/// Statistics over every timestep of every training window. Constant
/// features get sigma_floor instead of 0. Throws std::invalid_argument on an
/// empty set.
Standardizer fit_standardizer(const Dataset& train);

/// Copy-transforms every window; labels and provenance untouched. Throws
/// std::invalid_argument when the feature count differs.
Dataset apply_standardizer(const Standardizer& s, const Dataset& ds);

/// In-place variant for single windows (prediction path).
void standardize_window(const Standardizer& s, Matrix& window);

}  // namespace stallpred
