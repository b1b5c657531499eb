#pragma once

#include <cstdint>
#include <initializer_list>

namespace stm {

/// Sub-seed purposes. Values are part of the reproducibility contract; never renumber.
enum class SeedPurpose : std::uint64_t {
    Replicate = 1,
    Field = 2,
    Deployment = 3,
    Noise = 4,
    Probe = 5,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child seed by folding each path element into the parent with mix64.
/// A child depends only on its own path, so adding replicates or purposes never
/// perturbs existing streams.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(parent);
    for (std::uint64_t p : path) {
        s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
    }
    return s;
}

constexpr std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t replicate) {
    return derive_seed(master, {static_cast<std::uint64_t>(SeedPurpose::Replicate), replicate});
}

constexpr std::uint64_t purpose_seed(std::uint64_t replicate, SeedPurpose purpose) {
    return derive_seed(replicate, {static_cast<std::uint64_t>(purpose)});
}

}  // namespace stm
