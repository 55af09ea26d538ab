#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace jr {

// mt19937_64 with a fixed uint -> double mapping so streams are identical
// across standard library implementations.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(std::uint64_t seed) : eng(seed) {}

    double uniform() {  // [0, 1)
        return double(eng() >> 11) * 0x1.0p-53;
    }
    double symmetric() {  // [-1, 1)
        return 2.0 * uniform() - 1.0;
    }
    std::vector<double> vector(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = symmetric();
        return v;
    }
};

}  // namespace jr
