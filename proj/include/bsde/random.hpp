#pragma once

#include <array>
#include <cstdint>

namespace bsde {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: maps a
/// 128-bit counter and a 64-bit key to 128 pseudo-random bits.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// Random stream addressed by (seed, path, step). Two streams with different
/// addresses never share a Philox block, so every (path, step) pair gets its
/// own reproducible sequence no matter which thread draws it.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t path, std::uint32_t step) noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal via Box-Muller; consumes one Philox block per pair.
    double normal() noexcept;
    /// Poisson(mean) by sequential inversion. Intended for the small means
    /// of per-step jump counts.
    std::uint32_t poisson(double mean) noexcept;

private:
    std::uint64_t next_bits() noexcept;

    Philox4x32::Key key_;
    Philox4x32::Counter counter_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bsde
