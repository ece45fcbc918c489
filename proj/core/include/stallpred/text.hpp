#pragma once

#include <string>

namespace stallpred {

/// Shortest decimal form that round-trips the exact double (via
/// std::to_chars). Keeps every emitted artifact byte-stable.
std::string fmt_double(double v);

}  // namespace stallpred
