#pragma once

#include <cstdint>
#include <string_view>

namespace seaflow {

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/**
 * DetRng - deterministic generator with stable draw transforms.
 *
 * The engine is xoshiro-style splitmix chaining, fully specified here so the
 * same (seed, call sequence) yields identical draws on every platform and
 * standard library. Per-entity substreams are derived by hashing the entity
 * id into the master seed, so adding one entity never perturbs another's
 * stream.
 */
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {
        // Warm up so nearby seeds diverge immediately.
        next_u64();
        next_u64();
    }

    /// Substream for a named entity under a master seed.
    static DetRng for_entity(std::uint64_t master_seed, std::string_view entity_id) {
        return DetRng(splitmix64(master_seed ^ fnv1a64(entity_id)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound), bias-free via rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    bool chance(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return next_double() < p;
    }

    /// Standard normal via Box-Muller; caches the spare draw.
    double next_gaussian();

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace seaflow
