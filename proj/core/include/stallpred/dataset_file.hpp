#pragma once

#include <string>

#include "stallpred/standardize.hpp"
#include "stallpred/windows.hpp"

namespace stallpred {

/// Output of the prepare stage: standardized splits plus everything needed
/// to reproduce and audit them.
struct PreparedDataset {
    Splits splits;
    Standardizer standardizer;
    std::vector<std::string> series_ids;  // corpus id per provenance series_index
    std::uint64_t seed = 0;
    std::size_t window_len = 10;
    std::size_t horizon = 10;
};

/// Single-file container: "SPDS" magic, format version, a JSON manifest
/// (counts, seed, standardizer statistics, column order, series ids), then
/// per split a block of little-endian float64 windows, a label byte block
/// and a fixed-width provenance block.
void save_dataset(const PreparedDataset& pd, const std::string& path);

/// Throws FormatError on bad magic or truncation, VersionError on an
/// unsupported format version.
PreparedDataset load_dataset(const std::string& path);

}  // namespace stallpred
