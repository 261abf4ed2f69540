#pragma once

#include <cstdint>
#include <cmath>

namespace splinelens {

// Seeded deterministic generator: xoshiro256++ with splitmix64 state
// expansion. Integer core only, so streams are reproducible bit-for-bit
// from the seed; parallel runs use disjoint seeds (or split()).
class Rng {
public:
    static constexpr const char* kName = "xoshiro256++(splitmix64-seeded)";

    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Marsaglia polar (no trig, deterministic given libm sqrt/log)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    double normal(double sd) { return sd * normal(); }

    // +1 or -1 with equal probability
    int sign() { return (next() >> 63) ? 1 : -1; }

    // derived independent stream; deterministic in (parent seed, stream id)
    Rng split(std::uint64_t stream) const {
        std::uint64_t x = state_[0] ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        return Rng(splitmix64(x));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace splinelens
