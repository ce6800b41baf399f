#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rydode {

// SplitMix64 finalizer. Used to derive independent child seeds from a base
// seed and a path of stream indices, so results never depend on the order in
// which work items are executed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(base);
    for (std::uint64_t p : path) {
        s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    }
    return s;
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path = {}) {
    return std::mt19937_64(derive_seed(base, path));
}

}  // namespace rydode
