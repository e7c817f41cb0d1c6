#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "rolegate/catalog/store.hpp"
#include "rolegate/crypto/session_key.hpp"
#include "rolegate/errors.hpp"

namespace rolegate::session {

enum class Phase { issued, in_query, completed, expired };

inline std::string_view phase_name(Phase p) {
    switch (p) {
    case Phase::issued: return "Issued";
    case Phase::in_query: return "InQuery";
    case Phase::completed: return "Completed";
    case Phase::expired: return "Expired";
    }
    return "?";
}

struct SessionState {
    std::string session_id;
    std::uint64_t user_id = 0;
    std::string tenant_id;
    std::string username;
    crypto::SessionKey session_key;
    Phase phase = Phase::issued;
    std::chrono::steady_clock::time_point issued_at;
    std::chrono::seconds ttl{60};
};

/// Login, key issuance and the single-use transaction lifecycle. Every
/// session carries exactly one key and walks Issued -> InQuery -> Completed
/// (or -> Expired); phase changes are check-and-set under one lock, so a
/// replayed or raced begin_transaction loses deterministically.
class SessionManager {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    explicit SessionManager(catalog::Catalog& cat) : cat_(cat) {}
    SessionManager(catalog::Catalog& cat, std::uint64_t seed)
        : cat_(cat), keys_(seed) {}

    void set_clock(Clock c) { clock_ = std::move(c); }
    void set_ttl(std::chrono::seconds ttl) { ttl_ = ttl; }

    /// Credential check against the catalog's salted digests. The failure is
    /// deliberately uniform: a wrong password and an unknown user produce the
    /// same error, only an unknown tenant is distinguished.
    SessionState authenticate(const std::string& tenant_id, const std::string& username,
                              const std::string& password) {
        cat_.tenant(tenant_id); // throws TenantUnknown
        if (!cat_.verify_credentials(tenant_id, username, password)) {
            throw Error(Errc::auth_failure, "invalid credentials");
        }
        catalog::UserRecord user = cat_.user(tenant_id, username);

        std::lock_guard lk(mu_);
        SessionState st;
        st.session_id = "s" + std::to_string(next_id_++);
        st.user_id = user.user_id;
        st.tenant_id = tenant_id;
        st.username = username;
        st.session_key = keys_.generate(username, st.session_id);
        st.phase = Phase::issued;
        st.issued_at = clock_();
        st.ttl = ttl_;
        sessions_[st.session_id] = st;
        return st;
    }

    [[nodiscard]] SessionState session(const std::string& session_id) const {
        std::lock_guard lk(mu_);
        return locked_find(session_id);
    }

    /// Claims the session's single transaction. Exactly one caller can move
    /// Issued -> InQuery; everyone else (replays included) gets InvalidPhase.
    void begin_transaction(const std::string& session_id) {
        std::lock_guard lk(mu_);
        SessionState& st = locked_mut(session_id);
        locked_lazy_expire(st);
        if (st.phase != Phase::issued) {
            throw Error(Errc::invalid_phase,
                        "session " + session_id + " is " +
                            std::string(phase_name(st.phase)) + ", key already spent");
        }
        st.phase = Phase::in_query;
    }

    void complete(const std::string& session_id) {
        std::lock_guard lk(mu_);
        SessionState& st = locked_mut(session_id);
        if (st.phase != Phase::in_query) {
            throw Error(Errc::invalid_phase,
                        "session " + session_id + " is " +
                            std::string(phase_name(st.phase)) + ", not InQuery");
        }
        st.phase = Phase::completed;
    }

    /// Moves every over-age Issued/InQuery session to Expired.
    std::size_t expire_sweep(std::chrono::steady_clock::time_point now) {
        std::lock_guard lk(mu_);
        std::size_t n = 0;
        for (auto& [id, st] : sessions_) {
            if ((st.phase == Phase::issued || st.phase == Phase::in_query) &&
                now - st.issued_at >= st.ttl) {
                st.phase = Phase::expired;
                ++n;
            }
        }
        return n;
    }
    std::size_t expire_sweep() { return expire_sweep(clock_()); }

    [[nodiscard]] std::size_t live_count() const {
        std::lock_guard lk(mu_);
        std::size_t n = 0;
        for (const auto& [id, st] : sessions_) {
            if (st.phase == Phase::issued || st.phase == Phase::in_query) ++n;
        }
        return n;
    }

private:
    const SessionState& locked_find(const std::string& session_id) const {
        auto it = sessions_.find(session_id);
        if (it == sessions_.end()) {
            throw Error(Errc::session_not_found, "no session " + session_id);
        }
        return it->second;
    }
    SessionState& locked_mut(const std::string& session_id) {
        return const_cast<SessionState&>(locked_find(session_id));
    }
    void locked_lazy_expire(SessionState& st) {
        if (st.phase == Phase::issued && clock_() - st.issued_at >= st.ttl) {
            st.phase = Phase::expired;
        }
    }

    catalog::Catalog& cat_;
    crypto::SessionKeyGenerator keys_;
    mutable std::mutex mu_;
    std::map<std::string, SessionState> sessions_;
    std::uint64_t next_id_ = 1;
    std::chrono::seconds ttl_{60};
    Clock clock_ = [] { return std::chrono::steady_clock::now(); };
};

} // namespace rolegate::session
