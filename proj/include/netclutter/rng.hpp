#pragma once

#include <cstdint>
#include <random>

namespace netclutter {

// splitmix64 step, the usual seed-expansion finalizer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic family of independent generators derived from one root seed.
// substream(i) always yields the same generator for the same (seed, i), no
// matter how many other substreams were drawn, so replicate i of a simulation
// is reproducible even when replicates run on different workers.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::mt19937_64 substream(std::uint64_t index) const {
        std::uint64_t s = seed_ ^ ((index + 1) * 0xd6e8feb86659fd93ull);
        const std::uint64_t w1 = splitmix64(s);
        const std::uint64_t w2 = splitmix64(s);
        const std::uint64_t w3 = splitmix64(s);
        std::seed_seq seq{static_cast<std::uint32_t>(w1), static_cast<std::uint32_t>(w1 >> 32),
                          static_cast<std::uint32_t>(w2), static_cast<std::uint32_t>(w2 >> 32),
                          static_cast<std::uint32_t>(w3), static_cast<std::uint32_t>(w3 >> 32)};
        return std::mt19937_64(seq);
    }

private:
    std::uint64_t seed_;
};

}  // namespace netclutter
