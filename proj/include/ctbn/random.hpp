#ifndef CTBN_RANDOM_HPP
#define CTBN_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Self-contained random number generation. Sampling results are part of the
// reproducibility contract (seed -> output), so both the engine and the
// variate transforms live here rather than in <random>, whose distributions
// differ across standard libraries.

namespace ctbn {

// SplitMix64 finalizer; bijective 64-bit mixer used for seeding and for
// deriving per-stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Sub-stream derivation rule: the seed of stream i under a master seed is
// mix64(master XOR i).
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t i) {
    return mix64(master ^ i);
}

// xoshiro256** (Blackman & Vigna), seeded through SplitMix64.
class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& word : s_) {
            sm += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = sm;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    std::uint64_t s_[4];
};

// Variate generator over a seeded engine.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_.next(); }

    // Strictly inside (0, 1).
    double uniform01() {
        return (static_cast<double>(engine_.next() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::int64_t uniform_int(std::int64_t n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        auto v = static_cast<std::int64_t>(uniform01() * static_cast<double>(n));
        return v >= n ? n - 1 : v;
    }

    // Exponential with the given rate; strictly positive output.
    double exponential(double rate) { return -std::log(uniform01()) / rate; }

    // Index draw proportional to nonnegative weights; total must be their sum.
    int categorical(const std::vector<double>& weights, double total) {
        double r = uniform01() * total;
        double cum = 0.0;
        int last_positive = -1;
        for (size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_positive = static_cast<int>(i);
            cum += weights[i];
            if (r < cum) return static_cast<int>(i);
        }
        if (last_positive < 0) throw std::invalid_argument("categorical: no positive weight");
        return last_positive;
    }

    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        return categorical(weights, total);
    }

    // Symmetric Dirichlet(1,...,1) over `n` entries: normalized unit
    // exponentials.
    std::vector<double> dirichlet_uniform(int n) {
        std::vector<double> v(static_cast<size_t>(n));
        double total = 0.0;
        for (auto& x : v) {
            x = exponential(1.0);
            total += x;
        }
        for (auto& x : v) x /= total;
        return v;
    }

private:
    Xoshiro256ss engine_;
};

}  // namespace ctbn

#endif  // CTBN_RANDOM_HPP
