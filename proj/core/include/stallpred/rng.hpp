#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace stallpred {

/// Deterministic random source. mt19937_64 is fully specified by the C++
/// standard, and the normal/bounded-int transforms are written out by hand
/// (the std distribution objects are implementation-defined), so the same
/// seed yields the same stream on every platform and stdlib version.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1), 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal();

    /// Uniform integer in [0, n). Rejection sampling, unbiased.
    std::size_t below(std::size_t n);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent stream seed from a base seed (splitmix64 mix).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace stallpred
