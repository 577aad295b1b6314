#pragma once

#include <cmath>
#include <cstdint>

namespace epmon {

// Measurement-noise generator pinned to named algorithms so identical seeds
// give bit-identical streams on any platform or language:
//   state seeding  — splitmix64 (Steele/Lea/Flood)
//   uniform source — xoshiro256++ (Blackman/Vigna)
//   gaussian       — Box-Muller on 53-bit uniforms, sin value drawn first
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        std::uint64_t* s = state_;
        std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // uniform in (0, 1]; never zero so it is safe under log()
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        double mag = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * kPi * u2;
        spare_ = mag * std::cos(ang);
        have_spare_ = true;
        return mag * std::sin(ang);
    }

    // stable per-probe seed derivation from a scenario-wide base seed
    static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
        std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
        return splitmix64(x);
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace epmon
