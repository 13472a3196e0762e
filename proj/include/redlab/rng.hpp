#pragma once

#include <cstdint>
#include <vector>

namespace redlab {

/// splitmix64 step. Used both as the core generator and as the seed mixer
/// that derives per-run seeds from a master seed, so that grid runs are
/// reproducible bit-for-bit across platforms and thread counts.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and a tuple of indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= 0xa0761d6478bd642fULL * (a + 1);
    splitmix64(s);
    s ^= 0xe7037ed1a0b428dbULL * (b + 1);
    splitmix64(s);
    s ^= 0x8ebc6af09c88c6e3ULL * (c + 1);
    return splitmix64(s);
}

/// Small deterministic RNG. Avoids std::shuffle / std::uniform_int_distribution,
/// whose output sequences are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() { return splitmix64(state_); }

    /// Uniform integer in [0, n). Rejection sampling, bias-free.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// k distinct indices drawn uniformly from [0, n), in draw order.
    /// Partial Fisher-Yates over an index array.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::uint64_t state_;
};

} // namespace redlab
