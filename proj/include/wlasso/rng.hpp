#pragma once

#include <cstdint>
#include <limits>

namespace wlasso {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * Counter-based random stream.
 *
 * Output i of a stream is mix64(key + i * golden), so a stream is fully
 * determined by its key and streams keyed by (seed, id) never share state.
 * Parallel Monte Carlo trials take `Rng(seed, trial_index)` and produce the
 * same draws regardless of scheduling.
 *
 * Satisfies UniformRandomBitGenerator, but all library sampling goes through
 * the member helpers so results do not depend on the standard library's
 * distribution implementations.
 */
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        counter_ += 1;
        return mix64(key_ + counter_ * kGolden);
    }

    /// Child stream; independent of the parent's position.
    Rng split(std::uint64_t stream) const noexcept { return Rng(key_, stream); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound); bound must be positive. Lemire's method.
    std::uint64_t uniform_index(std::uint64_t bound) noexcept {
        auto m = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double q) noexcept { return uniform() < q; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Poisson(lambda) variate: inversion below 10, PTRS rejection above.
std::uint64_t poisson_variate(double lambda, Rng& rng);

}  // namespace wlasso
