#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace loadcast {

// Seeded random source with platform-independent derived distributions.
//
// std::uniform_real_distribution and friends are implementation-defined, so
// golden values would drift between standard libraries. Only the raw
// mt19937_64 stream (which is fully specified) is used; uniforms, normals,
// Bernoulli draws, and permutations are derived here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via the Box-Muller transform (one draw per call; the
    // second variate is cached).
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Derives an independent sub-stream seed from a top-level seed and a stream
// name ("init", "shuffle", "dropout", "synth", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace loadcast
