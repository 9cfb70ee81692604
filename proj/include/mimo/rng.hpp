#pragma once

#include <cstdint>
#include <random>

namespace mimo {

// SplitMix64 finalizer, used to derive independent engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream identifiers keep solver, channel and oracle draws disjoint.
enum class RngStream : std::uint64_t {
    Channel = 1,
    Oracle = 2,
    Property = 3,
};

// Engine for (seed, stream, index); pure function of its arguments.
inline std::mt19937_64 make_engine(std::uint64_t seed, RngStream stream, std::uint64_t index = 0)
{
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ static_cast<std::uint64_t>(stream));
    s = splitmix64(s ^ index);
    return std::mt19937_64(s);
}

}  // namespace mimo
