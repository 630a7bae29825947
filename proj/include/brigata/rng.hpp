#pragma once

// Seeded RNG with pinned sampling helpers. std::mt19937_64 output is fixed by
// the standard, but the standard distributions are not, so the bounded-int
// and unit-interval draws are implemented here to keep results reproducible
// across compilers.

#include <cstdint>
#include <random>
#include <vector>

namespace brigata {

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // Uniform in [0, n), unbiased via rejection.
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace brigata
