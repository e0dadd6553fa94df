#pragma once

#include <cmath>
#include <cstdint>

namespace chain {

// Philox4x32-10 counter-based generator. Streams are addressed by
// (seed, stream): every (trajectory | sample) index owns an independent
// stream, so parallel runs are reproducible for any worker count, and any
// position in a stream can be regenerated without replaying the prefix.
class Philox {
  public:
    Philox(std::uint64_t seed, std::uint64_t stream) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        ctr_[0] = 0;
        ctr_[1] = 0;
        ctr_[2] = static_cast<std::uint32_t>(stream);
        ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
    }

    std::uint64_t next_u64() {
        if (have_ == 0) {
            block();
            have_ = 4;
        }
        const std::uint32_t lo = out_[4 - have_];
        const std::uint32_t hi = out_[4 - have_ + 1];
        have_ -= 2;
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller. No rejection, so the mapping from
    // stream position to variate is static (required for coupled-noise runs).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        // u1 in (0,1] keeps the log finite.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

  private:
    static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b, std::uint32_t* lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        *lo = static_cast<std::uint32_t>(p);
        return static_cast<std::uint32_t>(p >> 32);
    }

    void block() {
        std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t lo0, lo1;
            const std::uint32_t hi0 = mulhi(0xD2511F53u, c0, &lo0);
            const std::uint32_t hi1 = mulhi(0xCD9E8D57u, c2, &lo1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out_[0] = c0;
        out_[1] = c1;
        out_[2] = c2;
        out_[3] = c3;
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::uint32_t key_[2];
    std::uint32_t ctr_[4];
    std::uint32_t out_[4] = {0, 0, 0, 0};
    int have_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Deterministic 64-bit mix for deriving per-instance seeds from a campaign seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ull * (salt + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace chain
