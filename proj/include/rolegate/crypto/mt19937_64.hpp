#pragma once

#include <array>
#include <cstdint>

namespace rolegate::crypto {

// 64-bit Mersenne Twister (MT19937-64), after Matsumoto & Nishimura's
// reference parameters. Produces the same stream as std::mt19937_64 for the
// same seed; the unit tests hold it to that.
class Mt19937_64 {
public:
    static constexpr std::uint64_t default_seed = 5489u;

    explicit Mt19937_64(std::uint64_t seed_value = default_seed) { seed(seed_value); }

    void seed(std::uint64_t s) {
        mt_[0] = s;
        for (std::size_t i = 1; i < kN; i++) {
            mt_[i] = 6364136223846793005ULL * (mt_[i - 1] ^ (mt_[i - 1] >> 62)) + i;
        }
        index_ = kN;
    }

    std::uint64_t operator()() {
        if (index_ >= kN) twist();
        std::uint64_t x = mt_[index_++];
        x ^= (x >> 29) & 0x5555555555555555ULL;
        x ^= (x << 17) & 0x71D67FFFEDA60000ULL;
        x ^= (x << 37) & 0xFFF7EEE000000000ULL;
        x ^= x >> 43;
        return x;
    }

private:
    static constexpr std::size_t kN = 312;
    static constexpr std::size_t kM = 156;
    static constexpr std::uint64_t kMatrixA = 0xB5026F5AA96619E9ULL;
    static constexpr std::uint64_t kUpperMask = 0xFFFFFFFF80000000ULL; // high 33 bits
    static constexpr std::uint64_t kLowerMask = 0x7FFFFFFFULL;         // low 31 bits

    void twist() {
        for (std::size_t i = 0; i < kN; i++) {
            std::uint64_t x = (mt_[i] & kUpperMask) | (mt_[(i + 1) % kN] & kLowerMask);
            std::uint64_t y = x >> 1;
            if (x & 1) y ^= kMatrixA;
            mt_[i] = mt_[(i + kM) % kN] ^ y;
        }
        index_ = 0;
    }

    std::array<std::uint64_t, kN> mt_{};
    std::size_t index_ = kN;
};

/// PRNG words constrained to [0, 2^64 - 2]: the all-ones word is rejected
/// and redrawn, so the maximum value is never produced.
template <typename Gen>
class BoundedWordSource {
public:
    explicit BoundedWordSource(Gen gen) : gen_(std::move(gen)) {}

    std::uint64_t operator()() {
        for (;;) {
            std::uint64_t v = gen_();
            if (v != ~0ULL) return v;
        }
    }

    Gen& generator() { return gen_; }

private:
    Gen gen_;
};

} // namespace rolegate::crypto
