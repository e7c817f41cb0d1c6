#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "rolegate/errors.hpp"
#include "rolegate/gateway/protocol.hpp"

namespace rolegate::gateway {

/// Owning POSIX socket handle.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Socket& operator=(Socket&& o) noexcept {
        if (this != &o) {
            close_fd();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close_fd(); }

    [[nodiscard]] int fd() const { return fd_; }
    [[nodiscard]] bool valid() const { return fd_ >= 0; }

    void shutdown_both() const {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

private:
    void close_fd() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }
    int fd_ = -1;
};

inline sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw Error(Errc::config_error, "bad listen address " + host);
    }
    return addr;
}

/// Blocking frame transport over one connection. Not thread-safe; each
/// connection is driven by a single task.
class FrameChannel {
public:
    explicit FrameChannel(Socket sock) : sock_(std::move(sock)) {}

    void send(const Frame& f) {
        Bytes wire = encode_frame(f);
        std::size_t off = 0;
        while (off < wire.size()) {
            ssize_t n = ::send(sock_.fd(), wire.data() + off, wire.size() - off,
                               MSG_NOSIGNAL);
            if (n <= 0) throw Error(Errc::io_error, "send failed");
            off += static_cast<std::size_t>(n);
        }
    }

    /// Next frame, or nullopt on orderly peer close. Throws MalformedFrame
    /// on framing violations and IoError on transport faults.
    std::optional<Frame> recv() {
        for (;;) {
            if (auto got = decode_frame(buf_)) {
                buf_.erase(buf_.begin(),
                           buf_.begin() + static_cast<std::ptrdiff_t>(got->second));
                return std::move(got->first);
            }
            std::uint8_t chunk[4096];
            ssize_t n = ::recv(sock_.fd(), chunk, sizeof chunk, 0);
            if (n == 0) {
                if (!buf_.empty()) {
                    throw Error(Errc::malformed_frame, "connection closed mid-frame");
                }
                return std::nullopt;
            }
            if (n < 0) throw Error(Errc::io_error, "recv failed");
            buf_.insert(buf_.end(), chunk, chunk + n);
        }
    }

    [[nodiscard]] const Socket& socket() const { return sock_; }

private:
    Socket sock_;
    Bytes buf_;
};

} // namespace rolegate::gateway
