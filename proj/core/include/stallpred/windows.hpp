#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stallpred/matrix.hpp"
#include "stallpred/timeseries.hpp"

namespace stallpred {

/// One training example: the 16 x window_len matrix of flight parameters at
/// timesteps t-window_len+1 .. t, labeled with the stall-warning state at
/// t+horizon.
struct WindowedSample {
    Matrix x;
    int label = 0;
};

struct SampleProvenance {
    std::uint32_t series_index = 0;  // into the corpus this pool was built from
    std::string series_id;
    std::uint32_t window_end = 0;   // t of the window's last column
    std::uint32_t label_index = 0;  // t + horizon
    bool window_has_warning = false;
};

struct Dataset {
    std::vector<WindowedSample> samples;
    std::vector<SampleProvenance> provenance;  // one entry per sample

    std::size_t size() const { return samples.size(); }
};

/// All windows of one series. Yields one sample per t in
/// [window_len-1, L-1-horizon]; L - window_len - horizon + 1 samples when
/// positive, none otherwise. Windows never cross series boundaries because
/// each series is windowed independently.
std::vector<WindowedSample> extract_windows(const TimeSeries& ts,
                                            std::size_t window_len = 10,
                                            std::size_t horizon = 10);

/// Windows every series and attaches provenance (series, window end, label
/// index, whether a warning occurs inside the window itself).
Dataset assemble_windows(const std::vector<TimeSeries>& corpus,
                         std::size_t window_len = 10, std::size_t horizon = 10);

struct SplitCounts {
    std::size_t train_pos = 1020;
    std::size_t train_neg = 1020;
    std::size_t val_each = 150;
    std::size_t test_each = 150;
};

struct Splits {
    Dataset train, val, test;
};

/// Draws class-exact, pairwise-disjoint train/val/test sets from the pool.
///
/// Positive candidates are samples labeled 1. Negative candidates are labeled
/// 0 AND contain no warning timestep inside the window, so negatives are
/// never contaminated by an in-window alarm. With segment_exclusive (default)
/// two samples whose dependency ranges [t-window_len+1, t+horizon] overlap in
/// the same series never land in different splits.
///
/// Selection is deterministic per seed. Throws CapacityError (with the
/// shortfall) when a class cannot be filled.
Splits balance_and_split(const Dataset& pool, const SplitCounts& counts,
                         std::uint64_t seed, bool segment_exclusive = true,
                         std::size_t window_len = 10, std::size_t horizon = 10);

}  // namespace stallpred
