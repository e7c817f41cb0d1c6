#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>

#include "rolegate/crypto/mt19937_64.hpp"
#include "rolegate/crypto/sha256.hpp"

namespace rolegate::crypto {

/// Single-transaction symmetric key: SHA-256 over a block of PRNG output.
struct SessionKey {
    std::array<std::uint8_t, 32> bytes{};
    std::string issued_to;
    std::string transaction_id;
};

/// Derives session keys from a Mersenne Twister stream. A key digests four
/// consecutive 64-bit words (big-endian, 32 bytes of seed material).
///
/// The generator state is advanced under an internal lock; one instance may
/// be shared between threads, but the stream itself is strictly sequential.
class SessionKeyGenerator {
public:
    /// Test mode: fixed seed, reproducible key stream.
    explicit SessionKeyGenerator(std::uint64_t seed)
        : source_(Mt19937_64(seed)) {}

    /// Production mode: entropy-seeded.
    SessionKeyGenerator() : SessionKeyGenerator(entropy_seed()) {}

    SessionKey generate(std::string issued_to, std::string transaction_id) {
        std::array<std::uint8_t, 32> block{};
        {
            std::lock_guard<std::mutex> lock(mu_);
            for (int w = 0; w < 4; w++) {
                std::uint64_t v = source_();
                for (int i = 0; i < 8; i++) {
                    block[w * 8 + i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
                }
            }
        }
        SessionKey key;
        key.bytes = sha256(block);
        key.issued_to = std::move(issued_to);
        key.transaction_id = std::move(transaction_id);
        return key;
    }

private:
    static std::uint64_t entropy_seed() {
        std::random_device rd;
        return static_cast<std::uint64_t>(rd()) << 32 | rd();
    }

    std::mutex mu_;
    BoundedWordSource<Mt19937_64> source_;
};

} // namespace rolegate::crypto
