#include "adsim/noise.hpp"

#include <cmath>
#include <numbers>

namespace adsim {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// 53-bit uniform in (0, 1]
double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::array<double, 2> NoiseStream::pair(std::uint64_t step, std::uint64_t block) const {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(step),
        static_cast<std::uint32_t>(step >> 32) ^ static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(realization_)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                           static_cast<std::uint32_t>(seed_ >> 32) ^
                                               static_cast<std::uint32_t>(realization_ >> 32)};
    const auto r = philox4x32(ctr, key);
    // Box-Muller
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

double NoiseStream::normal(std::uint64_t step, std::uint64_t node) const {
    return pair(step, node / 2)[node % 2];
}

void NoiseStream::fill(std::uint64_t step, std::span<double> out) const {
    const std::size_t n = out.size();
    for (std::size_t b = 0; 2 * b < n; ++b) {
        const auto z = pair(step, b);
        out[2 * b] = z[0];
        if (2 * b + 1 < n) out[2 * b + 1] = z[1];
    }
}

}  // namespace adsim
