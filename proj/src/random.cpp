#include "bsde/random.hpp"

#include <cmath>
#include <numbers>

namespace bsde {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMulA, ctr[0], lo0, hi0);
        mulhilo(kMulB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t path, std::uint32_t step) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, step, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)} {}

std::uint64_t RandomStream::next_bits() noexcept {
    if (used_ >= 4) {
        block_ = Philox4x32::generate(counter_, key_);
        ++counter_[0];
        used_ = 0;
    }
    const std::uint64_t hi = block_[used_];
    const std::uint64_t lo = block_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

double RandomStream::uniform() noexcept {
    return static_cast<double>(next_bits() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint32_t RandomStream::poisson(double mean) noexcept {
    if (!(mean > 0.0)) return 0;
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint32_t k = 0;
    // Stop once the remaining tail is below double resolution.
    while (u >= cdf && p > 0.0) {
        ++k;
        p *= mean / k;
        cdf += p;
    }
    return k;
}

}  // namespace bsde
