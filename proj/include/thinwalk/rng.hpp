#pragma once

#include <cstdint>

namespace thinwalk {

/// Counter-based stream: every draw is a pure function of (seed, trial, step),
/// so trials can run in any order or in parallel and still reproduce.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    std::uint64_t bits(std::uint64_t trial, std::uint64_t step, std::uint64_t attempt = 0) const {
        std::uint64_t x = mix(key_ ^ mix(trial + 0x9e3779b97f4a7c15ULL));
        x = mix(x ^ mix(step * 0xbf58476d1ce4e5b9ULL + attempt));
        return x;
    }

    /// Uniform integer in [0, bound) by Lemire multiply-and-reject.
    std::uint64_t uniform(std::uint64_t trial, std::uint64_t step, std::uint64_t bound) const {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (std::uint64_t attempt = 0;; ++attempt) {
            const auto prod = static_cast<unsigned __int128>(bits(trial, step, attempt)) * bound;
            if (static_cast<std::uint64_t>(prod) >= threshold) return static_cast<std::uint64_t>(prod >> 64);
        }
    }

    /// Uniform double in [0, 1).
    double unit(std::uint64_t trial, std::uint64_t step) const {
        return static_cast<double>(bits(trial, step) >> 11) * 0x1.0p-53;
    }

private:
    // SplitMix64 finalizer.
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
};

}  // namespace thinwalk
