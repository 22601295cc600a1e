#pragma once

#include <cstdint>
#include <string_view>

namespace ncb {

// SplitMix64 (Steele, Lea & Flood, 2014). One 64-bit state word advanced by a
// Weyl increment and finalized with an avalanche mix. Chosen because the
// algorithm is short enough to reimplement bit-exactly in any language, which
// keeps trial streams reproducible across ports from the same seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) from the top 53 bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [0, n) by rejection-free scaling; n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    }

    // Standard normal via Box-Muller on two uniforms.
    double next_gaussian();

private:
    std::uint64_t state_;
};

// FNV-1a 64-bit hash; used to fold string keys into RNG seeds and to digest
// output files in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

// Derives an independent stream seed from a base seed and a partition index.
// Workers seeded with derive_seed(seed, i) produce results independent of the
// schedule that assigned partitions to threads.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

// Seed for a keyed draw (base seed folded with a string key).
std::uint64_t keyed_seed(std::uint64_t base_seed, std::string_view key);

}  // namespace ncb
