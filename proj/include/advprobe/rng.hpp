#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace advprobe {

// Deterministic RNG with portable bounded sampling. std::mt19937_64 output is
// specified by the standard; the distribution helpers here avoid
// std::uniform_int_distribution, whose results vary across library
// implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound). bound must be > 0.
    uint64_t below(uint64_t bound) {
        // Rejection sampling on the top of the range keeps the draw unbiased.
        uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    bool coin() { return (engine_() >> 63) != 0; }

    // Uniform double in [0, 1).
    double unit() { return (engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<size_t>(below(v.size()))];
    }

    // Derives an independent stream, e.g. one per stratum.
    Rng fork(uint64_t salt) {
        return Rng(engine_() ^ (salt * 0x9E3779B97F4A7C15ull));
    }

private:
    std::mt19937_64 engine_;
};

} // namespace advprobe
