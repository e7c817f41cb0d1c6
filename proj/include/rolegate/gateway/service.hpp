#pragma once

#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "rolegate/catalog/store.hpp"
#include "rolegate/crypto/keyfile.hpp"
#include "rolegate/crypto/mt19937_64.hpp"
#include "rolegate/crypto/transport.hpp"
#include "rolegate/gateway/protocol.hpp"
#include "rolegate/rbac/engine.hpp"
#include "rolegate/session/manager.hpp"
#include "rolegate/sql/parser.hpp"
#include "rolegate/sql/regenerate.hpp"

namespace rolegate::gateway {

namespace detail {

/// Paillier nonce source shared by concurrent pipelines.
class LockedRng {
public:
    explicit LockedRng(std::uint64_t seed) : inner_(seed) {}
    std::uint64_t operator()() {
        std::lock_guard lk(mu_);
        return inner_();
    }

private:
    std::mutex mu_;
    crypto::Mt19937_64 inner_;
};

inline bool is_authz_failure(Errc c) {
    switch (c) {
    case Errc::session_not_found:
    case Errc::invalid_phase:
    case Errc::auth_failure:
    case Errc::auth_tag_mismatch:
    case Errc::user_not_found:
    case Errc::group_auth_failure:
    case Errc::no_activatable_role:
    case Errc::not_activated:
    case Errc::table_denied:
    case Errc::column_denied:
        return true;
    default:
        return false;
    }
}

} // namespace detail

/// The access-control pipeline behind the QUERY message: unseal, parse,
/// resolve roles, activate, check columns, regenerate, execute, seal. The
/// activated role is deactivated and the session completed on every path
/// out, success or not.
class GatewayService {
public:
    GatewayService(catalog::Catalog& cat, rbac::AccessEngine& eng,
                   session::SessionManager& sessions, std::uint64_t rng_seed = 0x9e3779b97f4a7c15ULL)
        : cat_(cat), eng_(eng), sessions_(sessions), rng_(rng_seed) {}

    /// Test instrumentation: called with a stage label as the pipeline walks
    /// it ("execute" fires before the storage call, everything else after
    /// its stage succeeds).
    using StageObserver = std::function<void(std::string_view, const QueryEnvelope&)>;
    void set_stage_observer(StageObserver obs) { observer_ = std::move(obs); }

    QueryOutcome handle_query(const QueryEnvelope& env) {
        auto started = std::chrono::steady_clock::now();
        QueryOutcome out;
        std::optional<session::SessionState> sess;
        bool in_transaction = false;
        std::optional<std::uint64_t> activated;
        std::string tenant;

        try {
            sess = sessions_.session(env.session_id);
            if (sess->user_id != env.user_id) {
                throw Error(Errc::auth_failure, "envelope user does not match the session");
            }
            tenant = sess->tenant_id;
            sessions_.begin_transaction(env.session_id); // single-use gate
            in_transaction = true;
            observe("begin", env);

            Bytes plain = crypto::transport_decrypt(
                std::span<const std::uint8_t, 32>(sess->session_key.bytes),
                env.encrypted_query);
            observe("decrypt", env);

            sql::ParsedQuery q = sql::parse(std::string(plain.begin(), plain.end()));
            observe("parse", env);

            rbac::RoleSet roles =
                eng_.get_user_roles(tenant, sess->username, env.group_key);
            observe("roles", env);

            auto t0 = std::chrono::steady_clock::now();
            auto [rol_a, delta] = eng_.activate_permission(
                tenant, env.session_id, roles, rbac::QueryContext::of(q));
            out.timings.activate_us = us_since(t0);
            activated = rol_a;
            observe("activate", env);

            ColumnGrant grant = eng_.get_user_columns(tenant, env.user_id, q);
            observe("columns", env);

            TableSchema schema = cat_.table_schema(q.table);
            sql::RegeneratedQuery regen =
                sql::regenerate(q, grant, cat_.row_filters(tenant, q.table), schema,
                                cat_.enc_key(tenant), rng_);
            observe("regenerate", env);

            observe("execute", env); // pre-storage: fault-injection point
            catalog::ResultSet rs = cat_.execute(tenant, regen.parsed);

            bool release_key = !grant.sensitive_columns.empty() && wants_sensitive(env);
            std::string body = render_result(q.kind, rs, release_key ? &tenant : nullptr);
            out.payload = crypto::transport_encrypt(
                std::span<const std::uint8_t, 32>(sess->session_key.bytes),
                Bytes(body.begin(), body.end()));
            out.status = q.kind == Action::select ? Status::rows : Status::ack;
            observe("seal", env);
        } catch (const Error& e) {
            out.status = detail::is_authz_failure(e.code()) ? Status::denied : Status::error;
            out.reason = e.what();
            out.payload.clear();
        } catch (const std::exception& e) {
            out.status = Status::error;
            out.reason = e.what();
            out.payload.clear();
        }

        // Terminal duties, unconditionally ("in both of the cases").
        if (activated) {
            auto t0 = std::chrono::steady_clock::now();
            try {
                eng_.deactivate_permission(tenant, env.user_id, env.session_id, *activated);
            } catch (const Error&) {
                // the role may have been dropped mid-flight; nothing to release
            }
            out.timings.deactivate_us = us_since(t0);
            observe("deactivate", env);
        }
        if (in_transaction) {
            try {
                sessions_.complete(env.session_id);
            } catch (const Error&) {
                // swept to Expired while we ran; the key is spent either way
            }
            observe("complete", env);
        }
        out.timings.access_us = us_since(started);
        return out;
    }

private:
    static std::int64_t us_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration_cast<std::chrono::microseconds>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }

    static bool wants_sensitive(const QueryEnvelope& env) {
        if (!env.optional_requests) return false;
        Bytes raw(env.optional_requests->begin(), env.optional_requests->end());
        Fields f = parse_fields(raw);
        auto it = f.find("sensitive");
        return it != f.end() && it->second == "1";
    }

    std::string render_result(Action kind, const catalog::ResultSet& rs,
                              const std::string* release_tenant) {
        std::string body;
        if (kind == Action::select) {
            body += "columns=";
            for (std::size_t i = 0; i < rs.columns.size(); ++i) {
                if (i) body += ',';
                body += rs.columns[i];
            }
            body += '\n';
            for (const auto& row : rs.rows) {
                body += "row=";
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (i) body += '\t';
                    body += escape_cell(render_cell(row[i]));
                }
                body += '\n';
            }
        } else {
            body += "affected=" + std::to_string(rs.affected) + "\n";
        }
        if (release_tenant) {
            body += "deckey=" +
                    to_hex(crypto::serialize_decryption_key(cat_.dec_key(*release_tenant))) +
                    "\n";
        }
        return body;
    }

    static std::string render_cell(const catalog::Cell& c) {
        if (std::holds_alternative<std::int64_t>(c)) {
            return std::to_string(std::get<std::int64_t>(c));
        }
        if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
        return sql::make_cipher_literal(std::get<Bytes>(c));
    }

    void observe(std::string_view stage, const QueryEnvelope& env) {
        if (observer_) observer_(stage, env);
    }

    catalog::Catalog& cat_;
    rbac::AccessEngine& eng_;
    session::SessionManager& sessions_;
    detail::LockedRng rng_;
    StageObserver observer_;
};

} // namespace rolegate::gateway
