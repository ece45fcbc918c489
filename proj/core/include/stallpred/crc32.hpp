#pragma once

#include <cstddef>
#include <cstdint>

namespace stallpred {

/// CRC-32 (IEEE 802.3, reflected, init/final 0xFFFFFFFF).
std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

}  // namespace stallpred
