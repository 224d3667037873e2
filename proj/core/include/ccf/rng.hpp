#pragma once

#include <cstdint>
#include <random>

namespace ccf {

/// splitmix64 step; used to derive independent, order-insensitive seed
/// streams from (master seed, task id) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based seed derivation: task `id` under `master` always gets the
/// same seed no matter how many tasks run or in which order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) {
    return splitmix64(splitmix64(master) ^ splitmix64(id * 0x9E3779B97F4A7C15ULL + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t id) {
    return std::mt19937_64(derive_seed(master, id));
}

} // namespace ccf
