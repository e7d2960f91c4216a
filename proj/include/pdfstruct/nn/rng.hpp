#pragma once

#include <cstdint>
#include <random>

namespace pdfstruct::nn {

// Deterministic helpers on top of mt19937_64. The standard distributions are
// implementation-defined, so every draw that must reproduce across toolchains
// goes through these instead.

inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
    return n ? g() % n : 0;
}

template <class Vec>
inline void shuffle_det(Vec& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
        std::swap(v[i - 1], v[j]);
    }
}

// splitmix64 step; used to derive independent per-item seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace pdfstruct::nn
