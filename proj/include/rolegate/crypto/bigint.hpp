#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <concepts>
#include <cstdint>
#include <optional>
#include <span>

#include "rolegate/bytes.hpp"
#include "rolegate/errors.hpp"

namespace rolegate::crypto {

using BigInt = boost::multiprecision::cpp_int;

/// Any callable source of uniform 64-bit words (std::mt19937_64, Mt19937_64, ...).
template <typename T>
concept WordSource = requires(T t) {
    { t() } -> std::convertible_to<std::uint64_t>;
};

inline BigInt powmod(const BigInt& base, const BigInt& exp, const BigInt& mod) {
    BigInt b = base % mod;
    if (b < 0) b += mod;
    return boost::multiprecision::powm(b, exp, mod);
}

inline std::size_t bit_length(const BigInt& x) {
    if (x <= 0) return 0;
    return boost::multiprecision::msb(x) + 1;
}

/// Modular inverse by extended Euclid; empty when gcd(a, m) != 1.
inline std::optional<BigInt> try_invmod(const BigInt& a, const BigInt& m) {
    BigInt r0 = m, r1 = a % m;
    if (r1 < 0) r1 += m;
    BigInt t0 = 0, t1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt r2 = r0 - q * r1;
        r0 = r1;
        r1 = r2;
        BigInt t2 = t0 - q * t1;
        t0 = t1;
        t1 = t2;
    }
    if (r0 != 1) return std::nullopt;
    if (t0 < 0) t0 += m;
    return t0;
}

inline BigInt invmod(const BigInt& a, const BigInt& m) {
    auto inv = try_invmod(a, m);
    if (!inv) throw Error(Errc::invalid_argument, "no modular inverse");
    return *inv;
}

/// Minimal big-endian magnitude; zero encodes as the empty string.
inline Bytes bigint_to_bytes(const BigInt& x) {
    if (x < 0) throw Error(Errc::invalid_argument, "negative bigint");
    Bytes out;
    BigInt v = x;
    while (v > 0) {
        out.push_back(static_cast<std::uint8_t>(v & 0xFF));
        v >>= 8;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

inline BigInt bytes_to_bigint(std::span<const std::uint8_t> b) {
    BigInt v = 0;
    for (std::uint8_t c : b) v = (v << 8) | c;
    return v;
}

template <WordSource Rng>
BigInt random_bits(Rng& rng, std::size_t nbits) {
    BigInt v = 0;
    std::size_t produced = 0;
    while (produced < nbits) {
        v = (v << 64) | BigInt(static_cast<std::uint64_t>(rng()));
        produced += 64;
    }
    // trim to exactly nbits
    v &= (BigInt(1) << nbits) - 1;
    return v;
}

/// Uniform value in [0, bound) by rejection sampling.
template <WordSource Rng>
BigInt random_below(Rng& rng, const BigInt& bound) {
    if (bound <= 0) throw Error(Errc::invalid_argument, "bound must be positive");
    std::size_t nbits = bit_length(bound);
    for (;;) {
        BigInt v = random_bits(rng, nbits);
        if (v < bound) return v;
    }
}

/// Uniform unit in Z*_n (nonzero, coprime to n).
template <WordSource Rng>
BigInt random_unit(Rng& rng, const BigInt& n) {
    for (;;) {
        BigInt r = random_below(rng, n);
        if (r != 0 && boost::multiprecision::gcd(r, n) == 1) return r;
    }
}

} // namespace rolegate::crypto
