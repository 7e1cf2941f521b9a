#pragma once

#include <cstdint>
#include <random>

namespace pfsim {

// splitmix64; used both as a stand-alone mixer and to key per-frame substreams
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Substream seed derived from a master seed and a stream index (frame index).
// Streams with distinct indices are statistically independent for mt19937_64.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = master ^ (index * 0x9e3779b97f4a7c15ULL + 0x853c49e6748fea9bULL);
    std::uint64_t b = splitmix64(s);
    return a ^ b;
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t index) {
    return std::mt19937_64(substream_seed(master, index));
}

}  // namespace pfsim
