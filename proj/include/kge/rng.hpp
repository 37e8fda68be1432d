#ifndef KGE_RNG_HPP_
#define KGE_RNG_HPP_

#include <cstdint>

namespace kge {

// Counter-based generator: output i of stream `seed` is splitmix64(seed, i).
// Small state (seed + counter), deterministic within this implementation,
// trivially fork-able per worker via the stream constructor.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed ^ (stream * 0x9e3779b97f4a7c15ull)), counter_(0) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // uniform integer in [0, n), unbiased by rejection
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    Rng fork(std::uint64_t stream) const { return Rng(seed_, stream + 1); }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace kge

#endif
