#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "rolegate/bytes.hpp"
#include "rolegate/crypto/paillier.hpp"
#include "rolegate/errors.hpp"

namespace rolegate::crypto {

/// Plaintext value of a sensitive cell: an integer or a UTF-8 string.
using PlainValue = std::variant<std::int64_t, std::string>;

// Encrypted-cell byte layout (version 0x01):
//   [0]    version
//   [1]    type tag: 0x01 integer, 0x02 string
//   [2..9] key id (8 raw bytes)
//   int:   u32 chunk_count = 1, then one length-prefixed ciphertext
//   str:   u32 original byte length, u32 chunk_count, then length-prefixed
//          ciphertexts; each plaintext chunk covers chunk_payload_bytes(n)
//          bytes of the string, interpreted big-endian, except a shorter tail.
inline constexpr std::uint8_t kBlobVersion = 0x01;
inline constexpr std::uint8_t kBlobTagInt = 0x01;
inline constexpr std::uint8_t kBlobTagStr = 0x02;

/// Bytes of string payload that fit below n in one Paillier plaintext.
inline std::size_t chunk_payload_bytes(const BigInt& n) {
    std::size_t bits = bit_length(n);
    return bits == 0 ? 0 : (bits - 1) / 8;
}

namespace detail {

template <typename EncryptFn>
Bytes encode_value(const paillier::EncryptionKey& key, const PlainValue& value,
                   EncryptFn&& encrypt_one) {
    Bytes out;
    append_u8(out, kBlobVersion);
    Bytes key_id_raw = from_hex(key.key_id);

    if (std::holds_alternative<std::int64_t>(value)) {
        std::int64_t iv = std::get<std::int64_t>(value);
        if (iv < 0 || BigInt(iv) >= key.n) {
            throw Error(Errc::encoding_overflow,
                        "integer literal outside the plaintext space [0, n)");
        }
        append_u8(out, kBlobTagInt);
        out.insert(out.end(), key_id_raw.begin(), key_id_raw.end());
        append_u32(out, 1);
        append_bytes(out, bigint_to_bytes(encrypt_one(BigInt(iv)).value));
        return out;
    }

    const std::string& s = std::get<std::string>(value);
    std::size_t payload = chunk_payload_bytes(key.n);
    if (payload < 1) {
        throw Error(Errc::encoding_overflow,
                    "plaintext space too small to hold one byte per chunk");
    }
    append_u8(out, kBlobTagStr);
    out.insert(out.end(), key_id_raw.begin(), key_id_raw.end());
    append_u32(out, static_cast<std::uint32_t>(s.size()));
    std::size_t chunks = s.empty() ? 0 : (s.size() + payload - 1) / payload;
    append_u32(out, static_cast<std::uint32_t>(chunks));
    for (std::size_t i = 0; i < chunks; i++) {
        std::size_t off = i * payload;
        std::size_t len = std::min(payload, s.size() - off);
        BigInt m = bytes_to_bigint(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(s.data()) + off, len));
        append_bytes(out, bigint_to_bytes(encrypt_one(m).value));
    }
    return out;
}

} // namespace detail

/// Encrypts a column value into the stored-cell layout with random nonces.
template <WordSource Rng>
Bytes encrypt_value(const paillier::EncryptionKey& key, const PlainValue& value, Rng& rng) {
    return detail::encode_value(key, value,
                                [&](const BigInt& m) { return paillier::encrypt(key, m, rng); });
}

/// Deterministic-nonce variant (test mode): equal plaintexts produce equal
/// blobs, so stored bytes can be compared directly in oracle tests.
inline Bytes encrypt_value_deterministic(const paillier::EncryptionKey& key,
                                         const PlainValue& value) {
    return detail::encode_value(key, value, [&](const BigInt& m) {
        return paillier::encrypt_with_r(key, m, paillier::deterministic_r(key, m));
    });
}

inline PlainValue decrypt_value(const paillier::DecryptionKey& key,
                                std::span<const std::uint8_t> blob) {
    ByteReader r(blob);
    if (r.u8() != kBlobVersion) throw Error(Errc::bad_encoding, "unknown cell version");
    std::uint8_t tag = r.u8();
    Bytes id_raw(8);
    for (auto& b : id_raw) b = r.u8();
    std::string blob_key_id = to_hex(id_raw);
    if (!key.key_id.empty() && blob_key_id != key.key_id) {
        throw Error(Errc::key_mismatch, "cell encrypted under a different key");
    }

    auto decrypt_chunk = [&]() {
        Bytes cbytes = r.bytes();
        paillier::Ciphertext c{bytes_to_bigint(cbytes), blob_key_id};
        return paillier::decrypt(key, c);
    };

    if (tag == kBlobTagInt) {
        if (r.u32() != 1) throw Error(Errc::bad_encoding, "integer cell must have one chunk");
        BigInt m = decrypt_chunk();
        r.expect_done();
        return static_cast<std::int64_t>(m);
    }
    if (tag != kBlobTagStr) throw Error(Errc::bad_encoding, "unknown cell type tag");

    std::size_t byte_len = r.u32();
    std::size_t chunks = r.u32();
    std::size_t payload = chunk_payload_bytes(key.n);
    if (payload < 1 || (byte_len + payload - 1) / payload != chunks) {
        throw Error(Errc::bad_encoding, "chunk count does not match byte length");
    }
    std::string s;
    s.reserve(byte_len);
    for (std::size_t i = 0; i < chunks; i++) {
        std::size_t len = std::min(payload, byte_len - i * payload);
        Bytes mb = bigint_to_bytes(decrypt_chunk());
        if (mb.size() > len) throw Error(Errc::bad_encoding, "chunk wider than its slot");
        s.append(len - mb.size(), '\0'); // restore stripped leading zero bytes
        s.append(mb.begin(), mb.end());
    }
    r.expect_done();
    return s;
}

/// Key id recorded in an encrypted cell, without decrypting it.
inline std::string blob_key_id(std::span<const std::uint8_t> blob) {
    ByteReader r(blob);
    r.u8();
    r.u8();
    Bytes id_raw(8);
    for (auto& b : id_raw) b = r.u8();
    return to_hex(id_raw);
}

} // namespace rolegate::crypto
