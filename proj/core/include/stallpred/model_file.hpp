#pragma once

#include <string>
#include <utility>

#include "stallpred/model.hpp"
#include "stallpred/standardize.hpp"

namespace stallpred {

/// Versioned model container: "SPMF" magic, format version, JSON manifest
/// (spec, seed, standardizer, tensor table), the parameter tensors as
/// little-endian float64 in canonical order, and a trailing CRC-32 over
/// everything before it. load(save(m)) reproduces the parameters bit for
/// bit.
///
/// Errors: CorruptFileError on checksum mismatch, VersionError on an unknown
/// format version, FormatError on truncation.
void save_model(const Model& m, const Standardizer& s, const std::string& path);

std::pair<Model, Standardizer> load_model(const std::string& path);

}  // namespace stallpred
