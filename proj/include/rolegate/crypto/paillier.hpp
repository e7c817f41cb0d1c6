#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "rolegate/crypto/bigint.hpp"
#include "rolegate/crypto/sha256.hpp"
#include "rolegate/errors.hpp"

namespace rolegate::crypto::paillier {

// Key distribution follows the gateway's trust model: the *encryption* key
// (n, g) stays on the server and encrypts sensitive column data; the
// *decryption* key (lambda, mu, n) is the capability released to users whose
// active role authorizes sensitive access. Note this is the reverse of the
// textbook public/private labeling for Paillier.

struct EncryptionKey {
    BigInt n;
    BigInt g;
    std::string key_id;

    [[nodiscard]] BigInt n_squared() const { return n * n; }
};

struct DecryptionKey {
    BigInt lambda;
    BigInt mu;
    BigInt n; // carried for the decryption arithmetic
    std::string key_id;
};

struct Ciphertext {
    BigInt value;
    std::string key_id;
};

struct KeyPair {
    EncryptionKey enc;
    DecryptionKey dec;
    BigInt p1;
    BigInt p2;
};

enum class GeneratorMode {
    n_plus_one, // g = n + 1, always valid, mu = lambda^-1 mod n
    random_unit // uniform g in Z*_{n^2} validated via the mu-existence check
};

inline std::string key_id_for_modulus(const BigInt& n) {
    Digest32 d = sha256(bigint_to_bytes(n));
    return to_hex(std::span<const std::uint8_t>(d.data(), 8));
}

// L(u) = (u - 1) / n, defined for u = 1 (mod n).
inline BigInt residue_quotient(const BigInt& u, const BigInt& n) {
    return (u - 1) / n;
}

inline bool is_probable_prime(const BigInt& n, WordSource auto& rng, int rounds = 40) {
    if (n < 2) return false;
    static constexpr int small_primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                           31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    for (int p : small_primes) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    // Miller-Rabin with `rounds` random bases.
    BigInt d = n - 1;
    std::size_t s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        s++;
    }
    for (int i = 0; i < rounds; i++) {
        BigInt a = 2 + random_below(rng, n - 3);
        BigInt x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (std::size_t r = 1; r < s; r++) {
            x = x * x % n;
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

template <WordSource Rng>
BigInt random_prime(Rng& rng, std::size_t bits) {
    if (bits < 2) throw Error(Errc::generation_failure, "prime size too small");
    for (;;) {
        BigInt cand = random_bits(rng, bits);
        cand |= BigInt(1) << (bits - 1); // exact bit length
        cand |= 1;                       // odd
        if (is_probable_prime(cand, rng)) return cand;
    }
}

/// Builds a key pair from two primes. Checks the coprimality condition
/// gcd(p1*p2, (p1-1)(p2-1)) = 1 (automatic when the primes have equal bit
/// length) and that n divides the order of g, i.e. that mu exists.
template <WordSource Rng>
KeyPair keygen_from_primes(const BigInt& p1, const BigInt& p2, Rng& rng,
                           GeneratorMode mode = GeneratorMode::n_plus_one) {
    if (p1 == p2) throw Error(Errc::generation_failure, "primes must be distinct");
    BigInt n = p1 * p2;
    if (boost::multiprecision::gcd(n, (p1 - 1) * (p2 - 1)) != 1) {
        throw Error(Errc::generation_failure, "gcd(p1*p2, (p1-1)(p2-1)) != 1");
    }
    BigInt lambda = boost::multiprecision::lcm(p1 - 1, p2 - 1);
    BigInt n2 = n * n;

    constexpr int kMaxAttempts = 64;
    for (int attempt = 0; attempt < kMaxAttempts; attempt++) {
        BigInt g = (mode == GeneratorMode::n_plus_one) ? n + 1 : random_unit(rng, n2);
        BigInt x = powmod(g, lambda, n2);
        if ((x - 1) % n != 0) continue; // n does not divide ord(g)
        auto mu = try_invmod(residue_quotient(x, n), n);
        if (!mu) continue;
        std::string id = key_id_for_modulus(n);
        KeyPair kp;
        kp.enc = EncryptionKey{n, g, id};
        kp.dec = DecryptionKey{lambda, *mu, n, id};
        kp.p1 = p1;
        kp.p2 = p2;
        return kp;
    }
    throw Error(Errc::generation_failure, "no valid generator found");
}

template <WordSource Rng>
KeyPair keygen(std::size_t bit_length, Rng& rng,
               GeneratorMode mode = GeneratorMode::n_plus_one) {
    if (bit_length < 16 || bit_length % 2 != 0) {
        throw Error(Errc::generation_failure,
                    "bit_length must be even and at least 16, got " +
                        std::to_string(bit_length));
    }
    constexpr int kMaxAttempts = 256;
    for (int attempt = 0; attempt < kMaxAttempts; attempt++) {
        BigInt p1 = random_prime(rng, bit_length / 2);
        BigInt p2 = random_prime(rng, bit_length / 2);
        if (p1 == p2) continue;
        if (boost::multiprecision::gcd(p1 * p2, (p1 - 1) * (p2 - 1)) != 1) continue;
        return keygen_from_primes(p1, p2, rng, mode);
    }
    throw Error(Errc::generation_failure, "could not generate a valid key pair");
}

/// c = g^m * r^n mod n^2 with a caller-chosen unit r.
inline Ciphertext encrypt_with_r(const EncryptionKey& key, const BigInt& m, const BigInt& r) {
    if (m < 0 || m >= key.n) {
        throw Error(Errc::plaintext_out_of_range,
                    "plaintext must lie in [0, n)");
    }
    if (r <= 0 || r >= key.n || boost::multiprecision::gcd(r, key.n) != 1) {
        throw Error(Errc::invalid_argument, "r must be a unit in Z*_n");
    }
    BigInt n2 = key.n_squared();
    BigInt gm;
    if (key.g == key.n + 1) {
        gm = (1 + m * key.n) % n2; // (n+1)^m = 1 + m*n (mod n^2)
    } else {
        gm = powmod(key.g, m, n2);
    }
    BigInt c = gm * powmod(r, key.n, n2) % n2;
    return Ciphertext{c, key.key_id};
}

template <WordSource Rng>
Ciphertext encrypt(const EncryptionKey& key, const BigInt& m, Rng& rng) {
    if (m < 0 || m >= key.n) {
        throw Error(Errc::plaintext_out_of_range, "plaintext must lie in [0, n)");
    }
    return encrypt_with_r(key, m, random_unit(rng, key.n));
}

/// Test-only deterministic nonce: r derived from (n, m) by hashing. Makes
/// encryption a pure function of the key and plaintext so ciphertext equality
/// can stand in for plaintext equality in oracle tests.
inline BigInt deterministic_r(const EncryptionKey& key, const BigInt& m) {
    Bytes seed = bigint_to_bytes(key.n);
    seed.push_back(0x3A);
    Bytes mb = bigint_to_bytes(m);
    seed.insert(seed.end(), mb.begin(), mb.end());
    BigInt r = bytes_to_bigint(sha256(seed)) % (key.n - 1) + 1;
    while (boost::multiprecision::gcd(r, key.n) != 1) {
        r = r % (key.n - 1) + 1;
    }
    return r;
}

inline BigInt decrypt(const DecryptionKey& key, const Ciphertext& c) {
    if (!c.key_id.empty() && !key.key_id.empty() && c.key_id != key.key_id) {
        throw Error(Errc::key_mismatch, "ciphertext was produced under a different key");
    }
    BigInt n2 = key.n * key.n;
    if (c.value <= 0 || c.value >= n2 || boost::multiprecision::gcd(c.value, n2) != 1) {
        throw Error(Errc::invalid_ciphertext, "ciphertext not a unit in Z*_{n^2}");
    }
    BigInt x = powmod(c.value, key.lambda, n2);
    if ((x - 1) % key.n != 0) {
        throw Error(Errc::invalid_ciphertext, "ciphertext not in the key's range");
    }
    return residue_quotient(x, key.n) * key.mu % key.n;
}

/// Additive homomorphism: the product of ciphertexts decrypts to the sum of
/// the plaintexts mod n.
inline Ciphertext add(const EncryptionKey& key, const Ciphertext& a, const Ciphertext& b) {
    if (a.key_id != key.key_id || b.key_id != key.key_id) {
        throw Error(Errc::key_mismatch, "operands under different keys");
    }
    BigInt n2 = key.n_squared();
    return Ciphertext{a.value * b.value % n2, key.key_id};
}

} // namespace rolegate::crypto::paillier
