#ifndef RSL_RNG_H
#define RSL_RNG_H

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace rsl {
std::uint64_t splitmix64(std::uint64_t x);

/*
  Derive an independent sub-seed from a master seed, a purpose tag and an
  index. Streams with different tags never share a sub-seed in practice, so
  e.g. training randomness and evaluation-state randomness stay disjoint.

    sub = splitmix64(splitmix64(master ^ fnv1a(tag)) + index)
*/
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0);

/*
  Seeded random source. All distributions are implemented here on top of
  mt19937_64 rather than with <random> distributions, whose output is
  implementation-defined; this keeps datasets byte-identical across
  standard libraries.
*/
class Rng {
    std::mt19937_64 engine;

public:
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    std::uint64_t next_u64() {return engine();}

    // Uniform in [0, bound); bound must be > 0.
    std::uint64_t uniform_index(std::uint64_t bound);

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform_real() {
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }
    double uniform_real(double lo, double hi) {
        return lo + (hi - lo) * uniform_real();
    }

    bool bernoulli(double p) {
        return uniform_real() < p;
    }

    template<typename T>
    void shuffle(std::vector<T> &values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(values[i - 1], values[j]);
        }
    }
};
}

#endif
