#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace flowgate {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for the stream identified by (seed, keys...). Streams with different
/// keys are statistically independent, so per-item draws do not depend on
/// the order in which items are processed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept
{
    std::uint64_t h = mix64(seed);
    for (auto k : keys)
        h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

/// Mersenne-twister engine with distribution code that is identical across
/// standard libraries (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
    {
        return Rng(stream_seed(seed, keys));
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace flowgate
