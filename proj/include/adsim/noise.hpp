#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace adsim {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Standard normal draws as a pure function of (seed, realization, step, node),
/// so trajectories do not depend on thread scheduling.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t realization)
        : seed_(seed), realization_(realization) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t realization() const { return realization_; }

    double normal(std::uint64_t step, std::uint64_t node) const;
    /// out[j] = normal(step, j)
    void fill(std::uint64_t step, std::span<double> out) const;

private:
    std::array<double, 2> pair(std::uint64_t step, std::uint64_t block) const;

    std::uint64_t seed_;
    std::uint64_t realization_;
};

}  // namespace adsim
