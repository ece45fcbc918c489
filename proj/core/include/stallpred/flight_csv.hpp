#pragma once

#include <string>
#include <string_view>

#include "stallpred/timeseries.hpp"

namespace stallpred {

/// Reads one flight recording from a comma-separated file: header row, one
/// row per timestep, UTF-8, no quoting. The header must name all 16 flight
/// parameters plus `stall_warning`, in any order; unknown columns are
/// ignored. An optional `time_s` column must be uniformly spaced and sets
/// the sample rate (1 Hz otherwise).
///
/// Errors: SchemaError naming the first missing column; ParseError with the
/// row number for non-numeric cells; ValidationError when stall_warning is
/// not 0/1; FormatError for a non-uniform time base.
TimeSeries parse_flight_csv(const std::string& path);

TimeSeries parse_flight_csv_text(std::string_view text, const std::string& id);

/// Inverse of the parser; emits time_s, the 16 parameters in canonical
/// order, then stall_warning. Values are shortest-round-trip decimals, so
/// parse(write(ts)) reproduces ts exactly.
std::string flight_to_csv(const TimeSeries& ts, bool with_time = true);

void write_flight_csv(const TimeSeries& ts, const std::string& path, bool with_time = true);

}  // namespace stallpred
