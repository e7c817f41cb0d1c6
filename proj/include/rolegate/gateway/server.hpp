#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rolegate/catalog/store.hpp"
#include "rolegate/gateway/protocol.hpp"
#include "rolegate/gateway/service.hpp"
#include "rolegate/gateway/socket.hpp"
#include "rolegate/session/manager.hpp"

namespace rolegate::gateway {

/// Framed-TCP front end: LOGIN caches the connection's credentials, each
/// KEYREQ mints one single-use session, QUERY runs the pipeline. One thread
/// per connection; the gateway itself keeps no unsynchronized shared state.
class Server {
public:
    Server(catalog::Catalog& cat, session::SessionManager& sessions, GatewayService& svc)
        : cat_(cat), sessions_(sessions), svc_(svc) {}

    ~Server() { stop(); }

    /// Binds and starts accepting. Port 0 picks an ephemeral port, readable
    /// via port() afterwards.
    void start(const std::string& host, std::uint16_t port) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw Error(Errc::io_error, "socket() failed");
        listener_ = Socket(fd);
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr = make_addr(host, port);
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
        }
        if (::listen(fd, 64) != 0) throw Error(Errc::io_error, "listen() failed");
        socklen_t len = sizeof addr;
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        running_ = true;
        acceptor_ = std::thread([this] { accept_loop(); });
    }

    [[nodiscard]] std::uint16_t port() const { return port_; }

    void stop() {
        bool was = running_.exchange(false);
        if (!was && !acceptor_.joinable()) return;
        listener_.shutdown_both();
        if (acceptor_.joinable()) acceptor_.join();
        listener_ = Socket();
        std::vector<std::thread> workers;
        {
            std::lock_guard lk(mu_);
            for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
            workers.swap(workers_);
        }
        for (auto& t : workers) t.join();
    }

private:
    struct Principal {
        std::string tenant;
        std::string username;
        std::string password;
    };

    void accept_loop() {
        while (running_) {
            int cfd = ::accept(listener_.fd(), nullptr, nullptr);
            if (cfd < 0) {
                if (!running_) break;
                continue;
            }
            std::lock_guard lk(mu_);
            if (!running_) {
                ::close(cfd);
                break;
            }
            live_fds_.push_back(cfd);
            workers_.emplace_back([this, cfd] { serve_connection(cfd); });
        }
    }

    void serve_connection(int cfd) {
        FrameChannel chan{Socket(cfd)};
        std::optional<Principal> who;
        try {
            while (auto frame = chan.recv()) {
                Frame reply = dispatch(*frame, who);
                chan.send(reply);
            }
        } catch (const Error& e) {
            // Framing violation or transport fault: report if possible, close.
            if (e.code() == Errc::malformed_frame) {
                try {
                    chan.send(error_frame(e));
                } catch (...) {
                }
            }
        }
        std::lock_guard lk(mu_);
        std::erase(live_fds_, cfd);
    }

    Frame dispatch(const Frame& req, std::optional<Principal>& who) {
        try {
            switch (req.tag) {
            case Tag::login: return on_login(req, who);
            case Tag::keyreq: return on_keyreq(who);
            case Tag::query: return on_query(req);
            default:
                throw Error(Errc::protocol_error, "unexpected client tag");
            }
        } catch (const Error& e) {
            return error_frame(e);
        } catch (const std::exception& e) {
            return error_frame(Error(Errc::io_error, e.what()));
        }
    }

    Frame on_login(const Frame& req, std::optional<Principal>& who) {
        Fields f = parse_fields(req.body);
        Principal p{require_field(f, "tenant"), require_field(f, "user"),
                    require_field(f, "password")};
        // Uniform failure, same as the session module's contract.
        if (!cat_.verify_credentials(p.tenant, p.username, p.password)) {
            throw Error(Errc::auth_failure, "invalid credentials");
        }
        std::uint64_t uid = cat_.user(p.tenant, p.username).user_id;
        who = std::move(p);
        Fields out{{"ok", "1"}, {"user", std::to_string(uid)}};
        return Frame{Tag::result, encode_fields(out)};
    }

    Frame on_keyreq(const std::optional<Principal>& who) {
        if (!who) throw Error(Errc::protocol_error, "KEYREQ before LOGIN");
        session::SessionState st =
            sessions_.authenticate(who->tenant, who->username, who->password);
        Fields out{{"session", st.session_id},
                   {"key", to_hex(st.session_key.bytes)},
                   {"user", std::to_string(st.user_id)}};
        return Frame{Tag::result, encode_fields(out)};
    }

    Frame on_query(const Frame& req) {
        QueryEnvelope env = parse_envelope(req.body);
        QueryOutcome outcome = svc_.handle_query(env);
        return Frame{Tag::result, encode_outcome(outcome)};
    }

    static Frame error_frame(const Error& e) {
        Fields f{{"code", std::string(errc_name(e.code()))}, {"message", e.what()}};
        return Frame{Tag::error, encode_fields(f)};
    }

    catalog::Catalog& cat_;
    session::SessionManager& sessions_;
    GatewayService& svc_;

    Socket listener_;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex mu_;
    std::vector<std::thread> workers_;
    std::vector<int> live_fds_;
};

} // namespace rolegate::gateway
