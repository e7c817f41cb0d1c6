#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rolegate/crypto/transport.hpp"
#include "rolegate/gateway/protocol.hpp"
#include "rolegate/gateway/socket.hpp"

namespace rolegate::gateway {

/// Blocking test/bench client for the framed protocol. One connection, one
/// caller at a time.
class Client {
public:
    Client(const std::string& host, std::uint16_t port)
        : chan_(connect_to(host, port)) {}

    struct SessionKey {
        std::string session_id;
        std::array<std::uint8_t, 32> key{};
        std::uint64_t user_id = 0;
    };

    /// Decrypted result payload.
    struct Result {
        std::vector<std::string> columns;
        std::vector<std::vector<std::string>> rows;
        std::uint64_t affected = 0;
        std::optional<Bytes> deckey; // serialized Paillier decryption key
    };

    std::uint64_t login(const std::string& tenant, const std::string& user,
                        const std::string& password) {
        Fields f{{"tenant", tenant}, {"user", user}, {"password", password}};
        Fields out = expect_result(roundtrip(Frame{Tag::login, encode_fields(f)}));
        return std::stoull(require_field(out, "user"));
    }

    SessionKey key_request() {
        Fields out = expect_result(roundtrip(Frame{Tag::keyreq, {}}));
        SessionKey sk;
        sk.session_id = require_field(out, "session");
        Bytes raw = from_hex(require_field(out, "key"));
        if (raw.size() != sk.key.size()) {
            throw Error(Errc::protocol_error, "bad key length");
        }
        std::copy(raw.begin(), raw.end(), sk.key.begin());
        sk.user_id = std::stoull(require_field(out, "user"));
        return sk;
    }

    QueryEnvelope seal_envelope(const SessionKey& sk, const std::string& sql_text,
                                std::optional<std::string> group_key = std::nullopt,
                                std::optional<std::string> requests = std::nullopt) {
        QueryEnvelope env;
        env.session_id = sk.session_id;
        env.user_id = sk.user_id;
        env.encrypted_query = crypto::transport_encrypt(
            std::span<const std::uint8_t, 32>(sk.key),
            Bytes(sql_text.begin(), sql_text.end()));
        env.group_key = std::move(group_key);
        env.optional_requests = std::move(requests);
        return env;
    }

    QueryOutcome send_envelope(const QueryEnvelope& env) {
        Frame reply = roundtrip(Frame{Tag::query, encode_envelope(env)});
        if (reply.tag == Tag::error) throw_error(reply);
        return parse_outcome(reply.body);
    }

    QueryOutcome query(const SessionKey& sk, const std::string& sql_text,
                       std::optional<std::string> group_key = std::nullopt,
                       std::optional<std::string> requests = std::nullopt) {
        return send_envelope(
            seal_envelope(sk, sql_text, std::move(group_key), std::move(requests)));
    }

    static Result open_payload(const SessionKey& sk, const QueryOutcome& outcome) {
        Bytes plain = crypto::transport_decrypt(
            std::span<const std::uint8_t, 32>(sk.key), outcome.payload);
        std::string text(plain.begin(), plain.end());
        Result r;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            std::string_view line(text.data() + pos, nl - pos);
            pos = nl + 1;
            if (line.starts_with("columns=")) {
                std::string_view csv = line.substr(8);
                while (!csv.empty()) {
                    std::size_t comma = csv.find(',');
                    r.columns.emplace_back(csv.substr(0, comma));
                    if (comma == std::string_view::npos) break;
                    csv.remove_prefix(comma + 1);
                }
            } else if (line.starts_with("row=")) {
                r.rows.push_back(split_cells(line.substr(4)));
            } else if (line.starts_with("affected=")) {
                r.affected = std::stoull(std::string(line.substr(9)));
            } else if (line.starts_with("deckey=")) {
                r.deckey = from_hex(line.substr(7));
            }
        }
        return r;
    }

    Frame roundtrip(const Frame& f) {
        chan_.send(f);
        auto reply = chan_.recv();
        if (!reply) throw Error(Errc::io_error, "server closed the connection");
        return *reply;
    }

    /// Raw byte access for protocol-abuse tests.
    void send_raw(const Bytes& wire) {
        std::size_t off = 0;
        while (off < wire.size()) {
            ssize_t n = ::send(chan_.socket().fd(), wire.data() + off,
                               wire.size() - off, MSG_NOSIGNAL);
            if (n <= 0) throw Error(Errc::io_error, "send failed");
            off += static_cast<std::size_t>(n);
        }
    }
    std::optional<Frame> recv_raw() { return chan_.recv(); }

private:
    static Socket connect_to(const std::string& host, std::uint16_t port) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw Error(Errc::io_error, "socket() failed");
        Socket sock(fd);
        sockaddr_in addr = make_addr(host, port);
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            throw Error(Errc::io_error,
                        "cannot connect to " + host + ":" + std::to_string(port));
        }
        return sock;
    }

    static Fields expect_result(const Frame& reply) {
        if (reply.tag == Tag::error) throw_error(reply);
        if (reply.tag != Tag::result) {
            throw Error(Errc::protocol_error, "unexpected reply tag");
        }
        return parse_fields(reply.body);
    }

    [[noreturn]] static void throw_error(const Frame& err) {
        Fields f = parse_fields(err.body);
        Errc code = errc_from_name(require_field(f, "code")).value_or(Errc::protocol_error);
        throw Error(code, require_field(f, "message"));
    }

    FrameChannel chan_;
};

} // namespace rolegate::gateway
