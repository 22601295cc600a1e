#include "ncb/rng.hpp"

#include <cmath>
#include <numbers>

namespace ncb {

double SplitMix64::next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
    SplitMix64 mixer(base_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    return mixer.next();
}

std::uint64_t keyed_seed(std::uint64_t base_seed, std::string_view key) {
    SplitMix64 mixer(base_seed ^ fnv1a64(key));
    return mixer.next();
}

}  // namespace ncb
