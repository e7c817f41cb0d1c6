#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include "rolegate/catalog/records.hpp"
#include "rolegate/crypto/keyfile.hpp"
#include "rolegate/crypto/mt19937_64.hpp"
#include "rolegate/crypto/paillier.hpp"
#include "rolegate/errors.hpp"
#include "rolegate/sql/regenerate.hpp"

namespace rolegate::catalog {

// Multi-tenant catalog plus embedded row store.
//
// Isolation is shared-database / shared-schema: all tenants' rows live in the
// same physical tables and every row carries its tenant_id; execute() conjoins
// an implicit tenant filter that the query language cannot express or bypass.
// Table schemas and the sensitive-column registry are therefore shared across
// tenants, while each tenant encrypts its own sensitive cells under its own
// Paillier key.
//
// Persistence is an append-only journal of mutation records with periodic
// whole-state snapshots (save()); reopening loads the snapshot and replays the
// journal tail. Concurrency: one reader-writer lock — reads shared, mutations
// exclusive, so a query sees a stable view.

namespace detail {

inline constexpr char kSnapshotMagic[] = "RGSNAP1\n";
inline constexpr char kJournalMagic[] = "RGJRNL1\n";

enum class JKind : std::uint8_t {
    tenant_create = 1,
    user_upsert = 2,
    user_delete = 3,
    group_upsert = 4,
    group_delete = 5,
    role_insert = 6,
    role_delete = 7,
    role_restore = 8, // snapshot only: verbatim node with bounds
    perm_grant = 9,
    table_create = 10,
    row_insert = 11,
    row_update = 12,
    row_delete = 13,
    policy_set = 14,
    filter_add = 15,
    counters = 16,
};

} // namespace detail

struct SensitiveFilterRow {
    std::string tenant_id;
    std::string table;
    sql::RowFilter filter;
};

class Catalog {
public:
    using InUseHook = std::function<bool(const std::string& tenant, std::uint64_t id)>;

    Catalog() = default;

    explicit Catalog(std::filesystem::path data_dir) : dir_(std::move(data_dir)) {
        std::filesystem::create_directories(*dir_);
        load();
        journal_.open(journal_path(), std::ios::binary | std::ios::app);
        if (!journal_) throw Error(Errc::io_error, "cannot open journal for append");
        if (std::filesystem::file_size(journal_path()) == 0) {
            journal_.write(detail::kJournalMagic, 8);
            journal_.flush();
        }
    }

    Catalog(const Catalog&) = delete;
    Catalog& operator=(const Catalog&) = delete;

    /// Live-session guards: when set, deletes are refused while the hook
    /// reports the subject as referenced.
    void set_role_in_use_hook(InUseHook h) { role_in_use_ = std::move(h); }
    void set_user_in_use_hook(InUseHook h) { user_in_use_ = std::move(h); }

    // ---- tenants -----------------------------------------------------------

    TenantRecord create_tenant(const std::string& tenant_id, const std::string& name,
                               crypto::paillier::KeyPair keys,
                               const std::string& root_role_name = "admin") {
        std::unique_lock lk(mu_);
        if (tenants_.contains(tenant_id)) {
            throw Error(Errc::referential_violation, "tenant " + tenant_id + " already exists");
        }
        TenantState st;
        st.rec.tenant_id = tenant_id;
        st.rec.name = name;
        st.rec.paillier_key_id = keys.enc.key_id;
        st.enc = keys.enc;
        st.dec = keys.dec;
        st.roles = hierarchy::RoleTree(tenant_id);
        auto [it, ok] = tenants_.emplace(tenant_id, std::move(st));
        (void)ok;
        journal(detail::JKind::tenant_create, serialize_tenant(it->second));

        const auto& root = insert_role(it->second, std::nullopt, root_role_name, {}, true);
        it->second.rec.root_role_id = root.role_id;
        journal(detail::JKind::role_insert,
                serialize_role_insert(tenant_id, std::nullopt, root_role_name, {}, true));
        return it->second.rec;
    }

    std::vector<TenantRecord> list_tenants() const {
        std::shared_lock lk(mu_);
        std::vector<TenantRecord> out;
        for (const auto& [id, st] : tenants_) out.push_back(st.rec);
        return out;
    }

    TenantRecord tenant(const std::string& tenant_id) const {
        std::shared_lock lk(mu_);
        return state(tenant_id).rec;
    }

    crypto::paillier::EncryptionKey enc_key(const std::string& tenant_id) const {
        std::shared_lock lk(mu_);
        return state(tenant_id).enc;
    }

    crypto::paillier::DecryptionKey dec_key(const std::string& tenant_id) const {
        std::shared_lock lk(mu_);
        return state(tenant_id).dec;
    }

    // ---- users -------------------------------------------------------------

    UserRecord register_user(const std::string& tenant_id, const std::string& username,
                             const std::string& password) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        if (st.users.contains(username)) {
            throw Error(Errc::referential_violation, "user " + username + " already exists");
        }
        UserRecord u;
        u.user_id = next_user_id_++;
        u.tenant_id = tenant_id;
        u.username = username;
        u.salt = random_salt();
        u.credential_hash = crypto::salted_sha256(u.salt, password);
        st.users.emplace(username, u);
        journal_user(u);
        return u;
    }

    void delete_user(const std::string& tenant_id, const std::string& username) {
        // The in-use hook may consult the activation engine; it runs before
        // the catalog lock so lock acquisition stays one-directional.
        if (user_in_use_) {
            std::uint64_t uid;
            {
                std::shared_lock sl(mu_);
                uid = find_user(tenant_id, username).user_id;
            }
            if (user_in_use_(tenant_id, uid)) {
                throw Error(Errc::referential_violation,
                            "user " + username + " has live sessions");
            }
        }
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        auto it = st.users.find(username);
        if (it == st.users.end()) throw Error(Errc::user_not_found, username);
        // Cascade group memberships.
        for (auto& [gid, g] : st.groups) {
            std::erase(g.member_user_ids, it->second.user_id);
            journal_group(g);
        }
        Bytes body;
        append_string(body, tenant_id);
        append_string(body, username);
        st.users.erase(it);
        journal(detail::JKind::user_delete, body);
    }

    std::vector<UserRecord> list_users(const std::string& tenant_id) const {
        std::shared_lock lk(mu_);
        std::vector<UserRecord> out;
        for (const auto& [name, u] : state(tenant_id).users) out.push_back(u);
        return out;
    }

    UserRecord user(const std::string& tenant_id, const std::string& username) const {
        std::shared_lock lk(mu_);
        return find_user(tenant_id, username);
    }

    bool verify_credentials(const std::string& tenant_id, const std::string& username,
                            const std::string& password) const {
        std::shared_lock lk(mu_);
        auto tit = tenants_.find(tenant_id);
        if (tit == tenants_.end()) return false;
        auto uit = tit->second.users.find(username);
        if (uit == tit->second.users.end()) return false;
        crypto::Digest32 h = crypto::salted_sha256(uit->second.salt, password);
        return constant_time_equal(h, uit->second.credential_hash);
    }

    void assign_role(const std::string& tenant_id, const std::string& username,
                     std::uint64_t role_id) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        auto uit = st.users.find(username);
        if (uit == st.users.end()) throw Error(Errc::user_not_found, username);
        require_role_in_tenant(tenant_id, role_id);
        auto& roles = uit->second.assigned_role_ids;
        if (std::find(roles.begin(), roles.end(), role_id) == roles.end()) {
            roles.push_back(role_id);
        }
        journal_user(uit->second);
    }

    void assign_role(const std::string& tenant_id, const std::string& username,
                     const std::string& role_name) {
        assign_role(tenant_id, username, role_id_by_name(tenant_id, role_name));
    }

    // ---- groups ------------------------------------------------------------

    GroupRecord create_group(const std::string& tenant_id, const std::string& group_id,
                             const std::string& group_key) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        if (st.groups.contains(group_id)) {
            throw Error(Errc::referential_violation, "group " + group_id + " already exists");
        }
        GroupRecord g;
        g.group_id = group_id;
        g.tenant_id = tenant_id;
        g.salt = random_salt();
        g.group_key_hash = crypto::salted_sha256(g.salt, group_key);
        st.groups.emplace(group_id, g);
        journal_group(g);
        return g;
    }

    void delete_group(const std::string& tenant_id, const std::string& group_id) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        auto it = st.groups.find(group_id);
        if (it == st.groups.end()) throw Error(Errc::not_found, "group " + group_id);
        for (auto& [name, u] : st.users) {
            if (std::erase(u.group_ids, group_id) > 0) journal_user(u);
        }
        Bytes body;
        append_string(body, tenant_id);
        append_string(body, group_id);
        st.groups.erase(it);
        journal(detail::JKind::group_delete, body);
    }

    void add_group_member(const std::string& tenant_id, const std::string& group_id,
                          const std::string& username) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        auto git = st.groups.find(group_id);
        if (git == st.groups.end()) throw Error(Errc::not_found, "group " + group_id);
        auto uit = st.users.find(username);
        if (uit == st.users.end()) throw Error(Errc::user_not_found, username);
        auto& members = git->second.member_user_ids;
        if (std::find(members.begin(), members.end(), uit->second.user_id) == members.end()) {
            members.push_back(uit->second.user_id);
        }
        auto& gids = uit->second.group_ids;
        if (std::find(gids.begin(), gids.end(), group_id) == gids.end()) {
            gids.push_back(group_id);
        }
        journal_group(git->second);
        journal_user(uit->second);
    }

    void add_group_role(const std::string& tenant_id, const std::string& group_id,
                        std::uint64_t role_id) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        auto git = st.groups.find(group_id);
        if (git == st.groups.end()) throw Error(Errc::not_found, "group " + group_id);
        require_role_in_tenant(tenant_id, role_id);
        auto& roles = git->second.role_ids;
        if (std::find(roles.begin(), roles.end(), role_id) == roles.end()) {
            roles.push_back(role_id);
        }
        journal_group(git->second);
    }

    void add_group_role(const std::string& tenant_id, const std::string& group_id,
                        const std::string& role_name) {
        add_group_role(tenant_id, group_id, role_id_by_name(tenant_id, role_name));
    }

    GroupRecord group(const std::string& tenant_id, const std::string& group_id) const {
        std::shared_lock lk(mu_);
        const TenantState& st = state(tenant_id);
        auto it = st.groups.find(group_id);
        if (it == st.groups.end()) throw Error(Errc::not_found, "group " + group_id);
        return it->second;
    }

    std::vector<GroupRecord> list_groups(const std::string& tenant_id) const {
        std::shared_lock lk(mu_);
        std::vector<GroupRecord> out;
        for (const auto& [id, g] : state(tenant_id).groups) out.push_back(g);
        return out;
    }

    bool verify_group_key(const std::string& tenant_id, const std::string& group_id,
                          const std::string& group_key) const {
        std::shared_lock lk(mu_);
        auto tit = tenants_.find(tenant_id);
        if (tit == tenants_.end()) return false;
        auto git = tit->second.groups.find(group_id);
        if (git == tit->second.groups.end()) return false;
        crypto::Digest32 h = crypto::salted_sha256(git->second.salt, group_key);
        return constant_time_equal(h, git->second.group_key_hash);
    }

    // ---- roles and permissions ----------------------------------------------

    hierarchy::RoleNode create_role(const std::string& tenant_id,
                                    const std::optional<std::string>& parent_name,
                                    const std::string& name, PermissionSet permissions,
                                    bool sensitive_allowed = false) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        std::optional<std::uint64_t> parent_id;
        if (parent_name) parent_id = st.roles.named(*parent_name).role_id;
        const auto& node = insert_role(st, parent_id, name, permissions, sensitive_allowed);
        journal(detail::JKind::role_insert,
                serialize_role_insert(tenant_id, parent_id, name, permissions,
                                      sensitive_allowed));
        return node;
    }

    void delete_role(const std::string& tenant_id, const std::string& role_name) {
        if (role_in_use_) {
            std::uint64_t rid;
            {
                std::shared_lock sl(mu_);
                rid = state(tenant_id).roles.named(role_name).role_id;
            }
            // Advisory check, pre-lock for the same reason as delete_user;
            // the engine tolerates ids that vanish between check and erase.
            if (role_in_use_(tenant_id, rid)) {
                throw Error(Errc::role_in_use, role_name + " has live activations");
            }
        }
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        std::uint64_t role_id = st.roles.named(role_name).role_id;
        st.roles.erase(role_id); // throws before any cascade if not deletable
        for (auto& [name, u] : st.users) {
            if (std::erase(u.assigned_role_ids, role_id) > 0) journal_user(u);
        }
        for (auto& [gid, g] : st.groups) {
            if (std::erase(g.role_ids, role_id) > 0) journal_group(g);
        }
        Bytes body;
        append_string(body, tenant_id);
        append_u64(body, role_id);
        journal(detail::JKind::role_delete, body);
    }

    void grant_permission(const std::string& tenant_id, const std::string& role_name,
                          const Permission& p) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        std::uint64_t role_id = st.roles.named(role_name).role_id;
        apply_grant(st, role_id, p);
        Bytes body;
        append_string(body, tenant_id);
        append_u64(body, role_id);
        append_permissions(body, {p});
        journal(detail::JKind::perm_grant, body);
    }

    hierarchy::RoleNode role(const std::string& tenant_id, const std::string& name) const {
        std::shared_lock lk(mu_);
        return state(tenant_id).roles.named(name);
    }

    std::uint64_t role_id_by_name(const std::string& tenant_id, const std::string& name) const {
        std::shared_lock lk(mu_);
        return state(tenant_id).roles.named(name).role_id;
    }

    /// Runs `f` on the tenant's role tree under the read lock.
    template <typename F>
    auto with_tree(const std::string& tenant_id, F&& f) const {
        std::shared_lock lk(mu_);
        return f(state(tenant_id).roles);
    }

    std::vector<PermissionRow> list_permissions(const std::string& tenant_id) const {
        std::shared_lock lk(mu_);
        std::vector<PermissionRow> out;
        std::uint64_t next = 1;
        for (const hierarchy::RoleNode* n : state(tenant_id).roles.all()) {
            for (const Permission& p : n->permissions) {
                out.push_back(PermissionRow{next++, n->role_id, p.action, p.table,
                                            p.columns, p.sensitive});
            }
        }
        return out;
    }

    // ---- schemas, policies, filters ----------------------------------------

    void create_table(const std::string& tenant_id, const std::string& table,
                      const std::vector<std::string>& columns) {
        std::unique_lock lk(mu_);
        state(tenant_id); // tenant must exist
        auto it = schemas_.find(table);
        if (it != schemas_.end()) {
            if (it->second.columns != columns) {
                throw Error(Errc::referential_violation,
                            "table " + table + " exists with a different layout");
            }
            return; // shared schema: second tenant attaches to the same table
        }
        TableSchema s;
        s.name = table;
        s.columns = columns;
        schemas_.emplace(table, s);
        Bytes body;
        append_schema(body, s);
        journal(detail::JKind::table_create, body);
    }

    void mark_sensitive_column(const std::string& tenant_id, const std::string& table,
                               const std::string& column) {
        std::unique_lock lk(mu_);
        state(tenant_id);
        auto it = schemas_.find(table);
        if (it == schemas_.end()) throw Error(Errc::not_found, "table " + table);
        if (!it->second.has_column(column)) {
            throw Error(Errc::not_found, "column " + column + " in " + table);
        }
        if (it->second.sensitive.contains(column)) return;
        // Existing plaintext cells cannot be retrofitted; require marking
        // before data lands.
        for (const DataRow& row : rows_[table]) {
            auto cit = row.cells.find(column);
            if (cit != row.cells.end() && !std::holds_alternative<Bytes>(cit->second)) {
                throw Error(Errc::referential_violation,
                            "column " + column + " already holds plaintext rows");
            }
        }
        it->second.sensitive.insert(column);
        Bytes body;
        append_schema(body, it->second);
        journal(detail::JKind::table_create, body); // upsert form
    }

    TableSchema table_schema(const std::string& table) const {
        std::shared_lock lk(mu_);
        auto it = schemas_.find(table);
        if (it == schemas_.end()) throw Error(Errc::not_found, "table " + table);
        return it->second;
    }

    std::vector<TableSchema> list_tables() const {
        std::shared_lock lk(mu_);
        std::vector<TableSchema> out;
        for (const auto& [name, s] : schemas_) out.push_back(s);
        return out;
    }

    void set_role_policy(const std::string& tenant_id, const std::string& role_name,
                         const RolePolicy& p) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        std::uint64_t role_id = st.roles.named(role_name).role_id;
        st.policies[role_id] = p;
        Bytes body;
        append_string(body, tenant_id);
        append_u64(body, role_id);
        append_policy(body, p);
        journal(detail::JKind::policy_set, body);
    }

    RolePolicy role_policy(const std::string& tenant_id, std::uint64_t role_id) const {
        std::shared_lock lk(mu_);
        const TenantState& st = state(tenant_id);
        auto it = st.policies.find(role_id);
        return it == st.policies.end() ? RolePolicy{} : it->second;
    }

    void add_row_filter(const std::string& tenant_id, const std::string& table,
                        sql::RowFilter filter) {
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        auto sit = schemas_.find(table);
        if (sit == schemas_.end()) throw Error(Errc::not_found, "table " + table);
        if (!sit->second.has_column(filter.column)) {
            throw Error(Errc::not_found, "column " + filter.column + " in " + table);
        }
        Bytes body;
        append_string(body, tenant_id);
        append_string(body, table);
        append_string(body, filter.column);
        append_u8(body, static_cast<std::uint8_t>(filter.op));
        append_value(body, filter.value);
        st.filters[table].push_back(std::move(filter));
        journal(detail::JKind::filter_add, body);
    }

    std::vector<sql::RowFilter> row_filters(const std::string& tenant_id,
                                            const std::string& table) const {
        std::shared_lock lk(mu_);
        const TenantState& st = state(tenant_id);
        auto it = st.filters.find(table);
        return it == st.filters.end() ? std::vector<sql::RowFilter>{} : it->second;
    }

    // ---- query execution -----------------------------------------------------

    /// Runs an authorized, regenerated statement. Sensitive predicates are
    /// evaluated decrypt-and-compare under the tenant's key; results keep
    /// sensitive cells as ciphertext.
    ResultSet execute(const std::string& tenant_id, const sql::ParsedQuery& q) {
        if (q.kind == Action::select) {
            std::shared_lock lk(mu_);
            return execute_select(state(tenant_id), q);
        }
        std::unique_lock lk(mu_);
        TenantState& st = state(tenant_id);
        switch (q.kind) {
            case Action::insert: return execute_insert(st, q);
            case Action::update: return execute_update(st, q);
            case Action::del: return execute_delete(st, q);
            default: throw Error(Errc::execution_error, "unreachable");
        }
    }

    std::size_t row_count(const std::string& table) const {
        std::shared_lock lk(mu_);
        auto it = rows_.find(table);
        return it == rows_.end() ? 0 : it->second.size();
    }

    // ---- persistence ----------------------------------------------------------

    /// Compacts: writes a full snapshot atomically and truncates the journal.
    void save() {
        std::unique_lock lk(mu_);
        if (!dir_) return;
        Bytes snap;
        snap.insert(snap.end(), detail::kSnapshotMagic, detail::kSnapshotMagic + 8);
        for (const auto& [tid, st] : tenants_) {
            frame(snap, detail::JKind::tenant_create, serialize_tenant(st));
            for (const hierarchy::RoleNode* n : st.roles.all()) {
                Bytes body;
                append_role_node(body, *n);
                frame(snap, detail::JKind::role_restore, body);
            }
            for (const auto& [name, u] : st.users) {
                Bytes body;
                append_user(body, u);
                frame(snap, detail::JKind::user_upsert, body);
            }
            for (const auto& [gid, g] : st.groups) {
                Bytes body;
                append_group(body, g);
                frame(snap, detail::JKind::group_upsert, body);
            }
            for (const auto& [rid, p] : st.policies) {
                Bytes body;
                append_string(body, tid);
                append_u64(body, rid);
                append_policy(body, p);
                frame(snap, detail::JKind::policy_set, body);
            }
            for (const auto& [table, filters] : st.filters) {
                for (const sql::RowFilter& f : filters) {
                    Bytes body;
                    append_string(body, tid);
                    append_string(body, table);
                    append_string(body, f.column);
                    append_u8(body, static_cast<std::uint8_t>(f.op));
                    append_value(body, f.value);
                    frame(snap, detail::JKind::filter_add, body);
                }
            }
        }
        for (const auto& [table, schema] : schemas_) {
            Bytes body;
            append_schema(body, schema);
            frame(snap, detail::JKind::table_create, body);
        }
        for (const auto& [table, rows] : rows_) {
            for (const DataRow& row : rows) {
                Bytes body;
                append_row(body, table, row);
                frame(snap, detail::JKind::row_insert, body);
            }
        }
        Bytes counters;
        append_u64(counters, next_user_id_);
        append_u64(counters, next_row_id_);
        frame(snap, detail::JKind::counters, counters);

        auto tmp = snapshot_path();
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out.write(reinterpret_cast<const char*>(snap.data()),
                      static_cast<std::streamsize>(snap.size()));
            if (!out) throw Error(Errc::io_error, "snapshot write failed");
        }
        std::filesystem::rename(tmp, snapshot_path());
        journal_.close();
        journal_.open(journal_path(), std::ios::binary | std::ios::trunc);
        journal_.write(detail::kJournalMagic, 8);
        journal_.flush();
    }

private:
    struct TenantState {
        TenantRecord rec;
        crypto::paillier::EncryptionKey enc;
        crypto::paillier::DecryptionKey dec;
        hierarchy::RoleTree roles;
        std::map<std::string, UserRecord> users;   // by username
        std::map<std::string, GroupRecord> groups; // by group id
        std::map<std::uint64_t, RolePolicy> policies;
        std::map<std::string, std::vector<sql::RowFilter>> filters; // by table
    };

    // ---- lookups -------------------------------------------------------------

    const TenantState& state(const std::string& tenant_id) const {
        auto it = tenants_.find(tenant_id);
        if (it == tenants_.end()) throw Error(Errc::tenant_unknown, tenant_id);
        return it->second;
    }

    TenantState& state(const std::string& tenant_id) {
        auto it = tenants_.find(tenant_id);
        if (it == tenants_.end()) throw Error(Errc::tenant_unknown, tenant_id);
        return it->second;
    }

    UserRecord find_user(const std::string& tenant_id, const std::string& username) const {
        const TenantState& st = state(tenant_id);
        auto it = st.users.find(username);
        if (it == st.users.end()) throw Error(Errc::user_not_found, username);
        return it->second;
    }

    /// RoleNotFound within the tenant, TenantMismatch when the id exists in a
    /// different tenant's hierarchy.
    void require_role_in_tenant(const std::string& tenant_id, std::uint64_t role_id) const {
        const TenantState& st = state(tenant_id);
        try {
            st.roles.node(role_id);
            return;
        } catch (const Error&) {
        }
        for (const auto& [tid, other] : tenants_) {
            if (tid == tenant_id) continue;
            try {
                other.roles.node(role_id);
                throw Error(Errc::tenant_mismatch,
                            "role " + std::to_string(role_id) + " belongs to tenant " + tid);
            } catch (const Error& e) {
                if (e.code() == Errc::tenant_mismatch) throw;
            }
        }
        throw Error(Errc::role_not_found, "role id " + std::to_string(role_id));
    }

    /// Role ids are allocated from one catalog-wide counter so an id can
    /// never be valid in two tenants at once; that is what lets cross-tenant
    /// references fail loudly instead of silently binding to a local role.
    const hierarchy::RoleNode& insert_role(TenantState& st,
                                           std::optional<std::uint64_t> parent_id,
                                           const std::string& name, PermissionSet perms,
                                           bool sensitive_allowed) {
        st.roles.set_next_id(next_role_id_);
        const auto& n = st.roles.insert(parent_id, name, std::move(perms), sensitive_allowed);
        next_role_id_ = st.roles.next_id();
        return n;
    }

    void apply_grant(TenantState& st, std::uint64_t role_id, const Permission& p) {
        // RoleTree nodes are edited through the tree only; permission grants
        // rebuild the node in place via restore-compatible access.
        hierarchy::RoleNode updated = st.roles.node(role_id);
        updated.permissions.insert(p);
        updated.sensitive_allowed = updated.sensitive_allowed || p.sensitive;
        st.roles.replace_permissions(role_id, updated.permissions, updated.sensitive_allowed);
    }

    // ---- execution -------------------------------------------------------------

    const TableSchema& schema_for(const sql::ParsedQuery& q) const {
        auto it = schemas_.find(q.table);
        if (it == schemas_.end()) {
            throw Error(Errc::execution_error, "no such table: " + q.table);
        }
        const TableSchema& s = it->second;
        for (const std::string& c : q.referenced_columns()) {
            if (!s.has_column(c)) {
                throw Error(Errc::execution_error, "no such column: " + c);
            }
        }
        return s;
    }

    crypto::PlainValue literal_plain(const TenantState& st, const sql::Value& v) const {
        if (sql::is_cipher_literal(v)) {
            return crypto::decrypt_value(st.dec, sql::cipher_literal_bytes(v));
        }
        if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
        return std::get<std::string>(v);
    }

    bool compare(const crypto::PlainValue& a, sql::Op op, const crypto::PlainValue& b) const {
        if (a.index() != b.index()) return false;
        auto cmp = [&](auto&& x, auto&& y) {
            switch (op) {
                case sql::Op::eq: return x == y;
                case sql::Op::lt: return x < y;
                case sql::Op::gt: return x > y;
                case sql::Op::le: return x <= y;
                case sql::Op::ge: return x >= y;
                case sql::Op::ne: return x != y;
            }
            return false;
        };
        if (std::holds_alternative<std::int64_t>(a)) {
            return cmp(std::get<std::int64_t>(a), std::get<std::int64_t>(b));
        }
        return cmp(std::get<std::string>(a), std::get<std::string>(b));
    }

    bool row_matches(const TenantState& st, const TableSchema& schema, const DataRow& row,
                     const std::vector<sql::Condition>& where) const {
        for (const sql::Condition& c : where) {
            auto cit = row.cells.find(c.column);
            if (cit == row.cells.end()) return false;
            const Cell& cell = cit->second;
            crypto::PlainValue lhs;
            if (schema.is_sensitive(c.column)) {
                if (!std::holds_alternative<Bytes>(cell)) {
                    throw Error(Errc::execution_error,
                                "sensitive column " + c.column + " holds plaintext");
                }
                if (!sql::is_cipher_literal(c.literal.value)) {
                    throw Error(Errc::execution_error,
                                "sensitive predicate on " + c.column +
                                    " requires an encrypted literal");
                }
                lhs = crypto::decrypt_value(st.dec, std::get<Bytes>(cell));
            } else if (std::holds_alternative<std::int64_t>(cell)) {
                lhs = std::get<std::int64_t>(cell);
            } else if (std::holds_alternative<std::string>(cell)) {
                lhs = std::get<std::string>(cell);
            } else {
                throw Error(Errc::execution_error,
                            "ciphertext in non-sensitive column " + c.column);
            }
            if (!compare(lhs, c.op, literal_plain(st, c.literal.value))) return false;
        }
        return true;
    }

    Cell cell_from_value(const TableSchema& schema, const std::string& column,
                         const sql::Value& v) const {
        if (schema.is_sensitive(column)) {
            if (!sql::is_cipher_literal(v)) {
                throw Error(Errc::execution_error,
                            "sensitive column " + column + " requires an encrypted literal");
            }
            return sql::cipher_literal_bytes(v);
        }
        if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
        return std::get<std::string>(v);
    }

    ResultSet execute_select(const TenantState& st, const sql::ParsedQuery& q) const {
        const TableSchema& schema = schema_for(q);
        if (q.select_star) {
            throw Error(Errc::execution_error, "unexpanded star reached execution");
        }
        ResultSet rs;
        rs.columns = q.select_columns;
        auto rit = rows_.find(q.table);
        if (rit == rows_.end()) return rs;
        for (const DataRow& row : rit->second) {
            if (row.tenant_id != st.rec.tenant_id) continue;
            if (!row_matches(st, schema, row, q.where)) continue;
            std::vector<Cell> out;
            for (const std::string& col : q.select_columns) {
                out.push_back(row.cells.at(col));
            }
            rs.rows.push_back(std::move(out));
        }
        return rs;
    }

    ResultSet execute_insert(TenantState& st, const sql::ParsedQuery& q) {
        const TableSchema& schema = schema_for(q);
        std::set<std::string> provided(q.insert_columns.begin(), q.insert_columns.end());
        if (provided.size() != q.insert_columns.size()) {
            throw Error(Errc::execution_error, "duplicate column in INSERT");
        }
        for (const std::string& col : schema.columns) {
            if (!provided.contains(col)) {
                throw Error(Errc::execution_error, "INSERT must provide column " + col);
            }
        }
        DataRow row;
        row.row_id = next_row_id_++;
        row.tenant_id = st.rec.tenant_id;
        for (std::size_t i = 0; i < q.insert_columns.size(); ++i) {
            row.cells[q.insert_columns[i]] =
                cell_from_value(schema, q.insert_columns[i], q.insert_values[i].value);
        }
        Bytes body;
        append_row(body, q.table, row);
        rows_[q.table].push_back(std::move(row));
        journal(detail::JKind::row_insert, body);
        ResultSet rs;
        rs.affected = 1;
        return rs;
    }

    ResultSet execute_update(TenantState& st, const sql::ParsedQuery& q) {
        const TableSchema& schema = schema_for(q);
        ResultSet rs;
        auto rit = rows_.find(q.table);
        if (rit == rows_.end()) return rs;
        for (DataRow& row : rit->second) {
            if (row.tenant_id != st.rec.tenant_id) continue;
            if (!row_matches(st, schema, row, q.where)) continue;
            for (const sql::Assignment& a : q.assignments) {
                row.cells[a.column] = cell_from_value(schema, a.column, a.literal.value);
            }
            Bytes body;
            append_row(body, q.table, row);
            journal(detail::JKind::row_update, body);
            rs.affected++;
        }
        return rs;
    }

    ResultSet execute_delete(TenantState& st, const sql::ParsedQuery& q) {
        const TableSchema& schema = schema_for(q);
        ResultSet rs;
        auto rit = rows_.find(q.table);
        if (rit == rows_.end()) return rs;
        auto& rows = rit->second;
        for (auto it = rows.begin(); it != rows.end();) {
            if (it->tenant_id == st.rec.tenant_id && row_matches(st, schema, *it, q.where)) {
                Bytes body;
                append_string(body, q.table);
                append_u64(body, it->row_id);
                journal(detail::JKind::row_delete, body);
                it = rows.erase(it);
                rs.affected++;
            } else {
                ++it;
            }
        }
        return rs;
    }

    // ---- persistence internals -------------------------------------------------

    std::filesystem::path snapshot_path() const { return *dir_ / "catalog.snapshot"; }
    std::filesystem::path journal_path() const { return *dir_ / "catalog.journal"; }

    static void frame(Bytes& out, detail::JKind kind, const Bytes& body) {
        append_u32(out, static_cast<std::uint32_t>(body.size() + 1));
        append_u8(out, static_cast<std::uint8_t>(kind));
        out.insert(out.end(), body.begin(), body.end());
    }

    void journal(detail::JKind kind, const Bytes& body) {
        if (!dir_ || replaying_) return;
        Bytes rec;
        frame(rec, kind, body);
        journal_.write(reinterpret_cast<const char*>(rec.data()),
                       static_cast<std::streamsize>(rec.size()));
        journal_.flush();
        if (!journal_) throw Error(Errc::io_error, "journal append failed");
    }

    void journal_user(const UserRecord& u) {
        Bytes body;
        append_user(body, u);
        journal(detail::JKind::user_upsert, body);
    }

    void journal_group(const GroupRecord& g) {
        Bytes body;
        append_group(body, g);
        journal(detail::JKind::group_upsert, body);
    }

    Bytes serialize_tenant(const TenantState& st) const {
        Bytes body;
        append_string(body, st.rec.tenant_id);
        append_string(body, st.rec.name);
        append_u64(body, st.rec.root_role_id);
        append_string(body, st.rec.paillier_key_id);
        append_bytes(body, crypto::serialize_encryption_key(st.enc));
        append_bytes(body, crypto::serialize_decryption_key(st.dec));
        append_u64(body, st.roles.next_id());
        return body;
    }

    static Bytes serialize_role_insert(const std::string& tenant_id,
                                       std::optional<std::uint64_t> parent_id,
                                       const std::string& name, const PermissionSet& perms,
                                       bool sensitive_allowed) {
        Bytes body;
        append_string(body, tenant_id);
        append_u8(body, parent_id ? 1 : 0);
        append_u64(body, parent_id.value_or(0));
        append_string(body, name);
        append_permissions(body, perms);
        append_u8(body, sensitive_allowed ? 1 : 0);
        return body;
    }

    static void append_policy(Bytes& out, const RolePolicy& p) {
        append_u8(out, p.window_start_hour ? 1 : 0);
        append_u32(out, static_cast<std::uint32_t>(p.window_start_hour.value_or(0)));
        append_u32(out, static_cast<std::uint32_t>(p.window_end_hour.value_or(0)));
        append_u8(out, p.max_concurrent ? 1 : 0);
        append_u32(out, p.max_concurrent.value_or(0));
    }

    static RolePolicy read_policy(ByteReader& r) {
        RolePolicy p;
        bool has_window = r.u8() != 0;
        auto start = static_cast<int>(r.u32());
        auto end = static_cast<int>(r.u32());
        if (has_window) {
            p.window_start_hour = start;
            p.window_end_hour = end;
        }
        bool has_max = r.u8() != 0;
        auto max = r.u32();
        if (has_max) p.max_concurrent = max;
        return p;
    }

    void load() {
        replaying_ = true;
        if (std::filesystem::exists(snapshot_path())) {
            replay_file(snapshot_path(), detail::kSnapshotMagic);
        }
        if (std::filesystem::exists(journal_path())) {
            replay_file(journal_path(), detail::kJournalMagic);
        }
        replaying_ = false;
        for (auto& [tid, st] : tenants_) st.roles.validate();
    }

    void replay_file(const std::filesystem::path& path, const char* magic) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
        Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (data.empty()) return;
        if (data.size() < 8 || !std::equal(data.begin(), data.begin() + 8,
                                           reinterpret_cast<const std::uint8_t*>(magic))) {
            throw Error(Errc::bad_encoding, "bad file header: " + path.string());
        }
        ByteReader r(std::span<const std::uint8_t>(data).subspan(8));
        while (!r.done()) {
            Bytes rec = r.bytes();
            ByteReader body(rec);
            auto kind = static_cast<detail::JKind>(body.u8());
            apply(kind, body);
        }
    }

    void apply(detail::JKind kind, ByteReader& r) {
        using detail::JKind;
        switch (kind) {
            case JKind::tenant_create: {
                TenantState st;
                st.rec.tenant_id = r.string();
                st.rec.name = r.string();
                st.rec.root_role_id = r.u64();
                st.rec.paillier_key_id = r.string();
                st.enc = crypto::parse_encryption_key(r.bytes());
                st.dec = crypto::parse_decryption_key(r.bytes());
                st.roles = hierarchy::RoleTree(st.rec.tenant_id);
                std::uint64_t next = r.u64();
                st.roles.set_next_id(next);
                next_role_id_ = std::max(next_role_id_, next);
                tenants_.insert_or_assign(st.rec.tenant_id, std::move(st));
                break;
            }
            case JKind::user_upsert: {
                UserRecord u = read_user(r);
                state(u.tenant_id).users.insert_or_assign(u.username, std::move(u));
                break;
            }
            case JKind::user_delete: {
                std::string tid = r.string();
                state(tid).users.erase(r.string());
                break;
            }
            case JKind::group_upsert: {
                GroupRecord g = read_group(r);
                state(g.tenant_id).groups.insert_or_assign(g.group_id, std::move(g));
                break;
            }
            case JKind::group_delete: {
                std::string tid = r.string();
                state(tid).groups.erase(r.string());
                break;
            }
            case JKind::role_insert: {
                std::string tid = r.string();
                bool has_parent = r.u8() != 0;
                std::uint64_t parent = r.u64();
                std::string name = r.string();
                PermissionSet perms = read_permissions(r);
                bool sensitive = r.u8() != 0;
                TenantState& st = state(tid);
                const auto& node = insert_role(
                    st, has_parent ? std::optional<std::uint64_t>(parent) : std::nullopt,
                    name, std::move(perms), sensitive);
                if (!has_parent) st.rec.root_role_id = node.role_id;
                break;
            }
            case JKind::role_delete: {
                std::string tid = r.string();
                std::uint64_t rid = r.u64();
                TenantState& st = state(tid);
                st.roles.erase(rid);
                for (auto& [name, u] : st.users) std::erase(u.assigned_role_ids, rid);
                for (auto& [gid, g] : st.groups) std::erase(g.role_ids, rid);
                break;
            }
            case JKind::role_restore: {
                hierarchy::RoleNode n = read_role_node(r);
                state(n.tenant_id).roles.restore(std::move(n));
                break;
            }
            case JKind::perm_grant: {
                std::string tid = r.string();
                std::uint64_t rid = r.u64();
                PermissionSet ps = read_permissions(r);
                for (const Permission& p : ps) apply_grant(state(tid), rid, p);
                break;
            }
            case JKind::table_create: {
                TableSchema s = read_schema(r);
                schemas_.insert_or_assign(s.name, std::move(s));
                break;
            }
            case JKind::row_insert: {
                auto [table, row] = read_row(r);
                next_row_id_ = std::max(next_row_id_, row.row_id + 1);
                rows_[table].push_back(std::move(row));
                break;
            }
            case JKind::row_update: {
                auto [table, row] = read_row(r);
                for (DataRow& existing : rows_[table]) {
                    if (existing.row_id == row.row_id) {
                        existing = row;
                        break;
                    }
                }
                break;
            }
            case JKind::row_delete: {
                std::string table = r.string();
                std::uint64_t rid = r.u64();
                auto& rows = rows_[table];
                std::erase_if(rows, [&](const DataRow& x) { return x.row_id == rid; });
                break;
            }
            case JKind::policy_set: {
                std::string tid = r.string();
                std::uint64_t rid = r.u64();
                state(tid).policies[rid] = read_policy(r);
                break;
            }
            case JKind::filter_add: {
                std::string tid = r.string();
                std::string table = r.string();
                sql::RowFilter f;
                f.column = r.string();
                f.op = static_cast<sql::Op>(r.u8());
                f.value = read_value(r);
                state(tid).filters[table].push_back(std::move(f));
                break;
            }
            case JKind::counters: {
                next_user_id_ = r.u64();
                next_row_id_ = r.u64();
                break;
            }
        }
    }

    Bytes random_salt() {
        Bytes salt(16);
        for (std::size_t i = 0; i < salt.size(); i += 8) {
            std::uint64_t w = salt_rng_();
            for (std::size_t k = 0; k < 8 && i + k < salt.size(); ++k) {
                salt[i + k] = static_cast<std::uint8_t>(w >> (8 * k));
            }
        }
        return salt;
    }

    static std::uint64_t entropy() {
        std::random_device rd;
        return static_cast<std::uint64_t>(rd()) << 32 | rd();
    }

    mutable std::shared_mutex mu_;
    std::optional<std::filesystem::path> dir_;
    std::ofstream journal_;
    bool replaying_ = false;

    std::map<std::string, TenantState> tenants_;
    std::map<std::string, TableSchema> schemas_;          // shared across tenants
    std::map<std::string, std::vector<DataRow>> rows_;    // shared, tenant-tagged
    std::uint64_t next_user_id_ = 1;
    std::uint64_t next_row_id_ = 1;
    std::uint64_t next_role_id_ = 1;
    crypto::Mt19937_64 salt_rng_{entropy()};

    InUseHook role_in_use_;
    InUseHook user_in_use_;
};

} // namespace rolegate::catalog
