#pragma once

#include "rolegate/bytes.hpp"
#include "rolegate/crypto/paillier.hpp"

namespace rolegate::crypto {

// Canonical key layouts, stable across releases:
//   encryption key:  [0x01][u32 len][n big-endian][u32 len][g big-endian]
//   decryption key:  [0x01][u32 len][lambda][u32 len][mu][u32 len][n]
// Integers are minimal big-endian magnitudes; lengths are big-endian u32.
inline constexpr std::uint8_t kKeyLayoutVersion = 0x01;

inline Bytes serialize_encryption_key(const paillier::EncryptionKey& key) {
    Bytes out;
    append_u8(out, kKeyLayoutVersion);
    append_bytes(out, bigint_to_bytes(key.n));
    append_bytes(out, bigint_to_bytes(key.g));
    return out;
}

inline Bytes serialize_decryption_key(const paillier::DecryptionKey& key) {
    Bytes out;
    append_u8(out, kKeyLayoutVersion);
    append_bytes(out, bigint_to_bytes(key.lambda));
    append_bytes(out, bigint_to_bytes(key.mu));
    append_bytes(out, bigint_to_bytes(key.n));
    return out;
}

inline paillier::EncryptionKey parse_encryption_key(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    if (r.u8() != kKeyLayoutVersion) throw Error(Errc::bad_encoding, "unknown key version");
    BigInt n = bytes_to_bigint(r.bytes());
    BigInt g = bytes_to_bigint(r.bytes());
    r.expect_done();
    return paillier::EncryptionKey{n, g, paillier::key_id_for_modulus(n)};
}

inline paillier::DecryptionKey parse_decryption_key(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    if (r.u8() != kKeyLayoutVersion) throw Error(Errc::bad_encoding, "unknown key version");
    BigInt lambda = bytes_to_bigint(r.bytes());
    BigInt mu = bytes_to_bigint(r.bytes());
    BigInt n = bytes_to_bigint(r.bytes());
    r.expect_done();
    return paillier::DecryptionKey{lambda, mu, n, paillier::key_id_for_modulus(n)};
}

} // namespace rolegate::crypto
