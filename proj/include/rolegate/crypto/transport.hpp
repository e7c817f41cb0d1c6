#pragma once

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <array>
#include <cstdint>
#include <memory>
#include <span>

#include "rolegate/bytes.hpp"
#include "rolegate/errors.hpp"

namespace rolegate::crypto {

// Query/result transport: AES-256-GCM under the transaction's session key.
// Sealed layout: [12-byte nonce][ciphertext][16-byte tag].
inline constexpr std::size_t kGcmNonceSize = 12;
inline constexpr std::size_t kGcmTagSize = 16;

namespace detail {
struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;
} // namespace detail

inline Bytes transport_encrypt(std::span<const std::uint8_t, 32> key,
                               std::span<const std::uint8_t> plaintext) {
    std::array<std::uint8_t, kGcmNonceSize> nonce{};
    if (RAND_bytes(nonce.data(), nonce.size()) != 1) {
        throw Error(Errc::generation_failure, "nonce generation failed");
    }

    detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw Error(Errc::generation_failure, "cipher context allocation failed");
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1) {
        throw Error(Errc::generation_failure, "AES-GCM init failed");
    }

    Bytes out(kGcmNonceSize + plaintext.size() + kGcmTagSize);
    std::copy(nonce.begin(), nonce.end(), out.begin());

    int len = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.data() + kGcmNonceSize, &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1) {
        throw Error(Errc::generation_failure, "AES-GCM encrypt failed");
    }
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + kGcmNonceSize + len, &fin) != 1) {
        throw Error(Errc::generation_failure, "AES-GCM finalize failed");
    }
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagSize,
                            out.data() + kGcmNonceSize + plaintext.size()) != 1) {
        throw Error(Errc::generation_failure, "AES-GCM tag retrieval failed");
    }
    return out;
}

inline Bytes transport_decrypt(std::span<const std::uint8_t, 32> key,
                               std::span<const std::uint8_t> sealed) {
    if (sealed.size() < kGcmNonceSize + kGcmTagSize) {
        throw Error(Errc::auth_tag_mismatch, "sealed payload too short");
    }
    std::size_t ct_size = sealed.size() - kGcmNonceSize - kGcmTagSize;

    detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw Error(Errc::generation_failure, "cipher context allocation failed");
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), sealed.data()) != 1) {
        throw Error(Errc::generation_failure, "AES-GCM init failed");
    }

    Bytes out(ct_size);
    int len = 0;
    if (ct_size > 0 &&
        EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data() + kGcmNonceSize,
                          static_cast<int>(ct_size)) != 1) {
        throw Error(Errc::auth_tag_mismatch, "payload authentication failed");
    }

    std::array<std::uint8_t, kGcmTagSize> tag{};
    std::copy(sealed.end() - kGcmTagSize, sealed.end(), tag.begin());
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagSize, tag.data()) != 1) {
        throw Error(Errc::generation_failure, "AES-GCM tag set failed");
    }
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
        throw Error(Errc::auth_tag_mismatch, "payload authentication failed");
    }
    return out;
}

} // namespace rolegate::crypto
