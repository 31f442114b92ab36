#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace owmm {

// All randomness in the project goes through this engine. The standard
// <random> distributions are not bit-stable across library implementations,
// so the distribution code lives here, on top of the (portable) mt19937_64
// stream. Identical seeds give identical draws on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform in [0, n). Rejection sampling, no modulo bias.
    uint64_t bounded(uint64_t n);

    /// Uniform integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(bounded(static_cast<uint64_t>(hi - lo + 1)));
    }

    /// Standard normal via Box-Muller (two u64 draws per call).
    double normal();
    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derives an independent child seed. Used to give sub-systems
    /// (scene gen, task spawn, shuffles, episodes) decoupled streams.
    static uint64_t derive(uint64_t seed, uint64_t stream);

private:
    std::mt19937_64 eng_;
};

/// FNV-1a 64-bit hash. Stable across platforms; used for context digests
/// and deterministic template selection.
uint64_t fnv1a64(std::string_view data);

/// Lower-case hex rendering of a 64-bit value, zero padded to 16 chars.
std::string to_hex(uint64_t v);

}  // namespace owmm
