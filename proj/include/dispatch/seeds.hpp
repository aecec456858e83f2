#ifndef DISPATCH_SEEDS_HPP
#define DISPATCH_SEEDS_HPP

#include <cstdint>

namespace dispatch {

// Counter-based seed splitting (splitmix64 finalizer). Every random draw in
// the system is a pure function of the root seed plus a handful of stream
// labels, so runs are reproducible regardless of thread or call order.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t split_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
    std::uint64_t h = mix64(root ^ 0x6a09e667f3bcc908ull);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// Uniform double in [0, 1).
inline double seed_unit(std::uint64_t seed) {
    return static_cast<double>(mix64(seed) >> 11) * 0x1.0p-53;
}

// Uniform double in [-amp, amp).
inline double seed_symmetric(std::uint64_t seed, double amp) {
    return (2.0 * seed_unit(seed) - 1.0) * amp;
}

} // namespace dispatch

#endif
