#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "rolegate/bytes.hpp"
#include "rolegate/errors.hpp"

namespace rolegate::crypto {

using Digest32 = std::array<std::uint8_t, 32>;

inline Digest32 sha256(std::span<const std::uint8_t> data) {
    Digest32 out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw Error(Errc::generation_failure, "SHA-256 digest failed");
    }
    return out;
}

inline Digest32 sha256(std::string_view s) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

/// Salted hash used for stored credentials and group keys; the plaintext
/// secret never reaches the persistence layer.
inline Digest32 salted_sha256(std::span<const std::uint8_t> salt,
                              std::span<const std::uint8_t> secret) {
    Bytes buf;
    buf.reserve(salt.size() + secret.size());
    buf.insert(buf.end(), salt.begin(), salt.end());
    buf.insert(buf.end(), secret.begin(), secret.end());
    return sha256(buf);
}

inline Digest32 salted_sha256(std::span<const std::uint8_t> salt, std::string_view secret) {
    return salted_sha256(salt, std::span<const std::uint8_t>(
                                   reinterpret_cast<const std::uint8_t*>(secret.data()),
                                   secret.size()));
}

} // namespace rolegate::crypto
