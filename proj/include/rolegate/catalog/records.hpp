#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rolegate/bytes.hpp"
#include "rolegate/crypto/sha256.hpp"
#include "rolegate/errors.hpp"
#include "rolegate/hierarchy/nested_set.hpp"
#include "rolegate/permission.hpp"
#include "rolegate/schema.hpp"
#include "rolegate/sql/ast.hpp"

namespace rolegate::catalog {

struct TenantRecord {
    std::string tenant_id;
    std::string name;
    std::uint64_t root_role_id = 0;
    std::string paillier_key_id;
};

struct UserRecord {
    std::uint64_t user_id = 0;
    std::string tenant_id;
    std::string username;
    Bytes salt;
    crypto::Digest32 credential_hash{};
    std::vector<std::uint64_t> assigned_role_ids;
    std::vector<std::string> group_ids;
};

struct GroupRecord {
    std::string group_id;
    std::string tenant_id;
    Bytes salt;
    crypto::Digest32 group_key_hash{};
    std::vector<std::uint64_t> role_ids;
    std::vector<std::uint64_t> member_user_ids;
};

/// Flat view of one Permission entry attached to a role.
struct PermissionRow {
    std::uint64_t permission_id = 0;
    std::uint64_t role_id = 0;
    Action action = Action::select;
    std::string table;
    std::set<std::string> columns;
    bool sensitive = false;
};

/// One stored cell: plaintext integer or string, or the encrypted blob of a
/// sensitive column.
using Cell = std::variant<std::int64_t, std::string, Bytes>;

struct DataRow {
    std::uint64_t row_id = 0;
    std::string tenant_id;
    std::map<std::string, Cell> cells;
};

struct ResultSet {
    std::vector<std::string> columns;         // SELECT projection, in order
    std::vector<std::vector<Cell>> rows;
    std::uint64_t affected = 0;               // INSERT/UPDATE/DELETE
};

/// Role availability constraints evaluated at activation time.
struct RolePolicy {
    std::optional<int> window_start_hour; // inclusive, 0-23
    std::optional<int> window_end_hour;   // exclusive
    std::optional<std::uint32_t> max_concurrent;
};

// ---- serialization ---------------------------------------------------------

inline void append_cell(Bytes& out, const Cell& c) {
    if (std::holds_alternative<std::int64_t>(c)) {
        append_u8(out, 1);
        append_u64(out, static_cast<std::uint64_t>(std::get<std::int64_t>(c)));
    } else if (std::holds_alternative<std::string>(c)) {
        append_u8(out, 2);
        append_string(out, std::get<std::string>(c));
    } else {
        append_u8(out, 3);
        append_bytes(out, std::get<Bytes>(c));
    }
}

inline Cell read_cell(ByteReader& r) {
    switch (r.u8()) {
        case 1: return static_cast<std::int64_t>(r.u64());
        case 2: return r.string();
        case 3: return r.bytes();
    }
    throw Error(Errc::bad_encoding, "unknown cell tag");
}

inline void append_value(Bytes& out, const sql::Value& v) {
    if (std::holds_alternative<std::int64_t>(v)) {
        append_u8(out, 1);
        append_u64(out, static_cast<std::uint64_t>(std::get<std::int64_t>(v)));
    } else {
        append_u8(out, 2);
        append_string(out, std::get<std::string>(v));
    }
}

inline sql::Value read_value(ByteReader& r) {
    switch (r.u8()) {
        case 1: return static_cast<std::int64_t>(r.u64());
        case 2: return r.string();
    }
    throw Error(Errc::bad_encoding, "unknown value tag");
}

inline void append_permissions(Bytes& out, const PermissionSet& perms) {
    append_u32(out, static_cast<std::uint32_t>(perms.size()));
    for (const Permission& p : perms) {
        append_u8(out, static_cast<std::uint8_t>(p.action));
        append_string(out, p.table);
        append_u32(out, static_cast<std::uint32_t>(p.columns.size()));
        for (const auto& c : p.columns) append_string(out, c);
        append_u8(out, p.sensitive ? 1 : 0);
    }
}

inline PermissionSet read_permissions(ByteReader& r) {
    PermissionSet out;
    std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        Permission p;
        p.action = static_cast<Action>(r.u8());
        p.table = r.string();
        std::uint32_t ncols = r.u32();
        for (std::uint32_t k = 0; k < ncols; ++k) p.columns.insert(r.string());
        p.sensitive = r.u8() != 0;
        out.insert(std::move(p));
    }
    return out;
}

inline void append_digest(Bytes& out, const crypto::Digest32& d) {
    out.insert(out.end(), d.begin(), d.end());
}

inline crypto::Digest32 read_digest(ByteReader& r) {
    crypto::Digest32 d;
    for (auto& b : d) b = r.u8();
    return d;
}

inline void append_user(Bytes& out, const UserRecord& u) {
    append_u64(out, u.user_id);
    append_string(out, u.tenant_id);
    append_string(out, u.username);
    append_bytes(out, u.salt);
    append_digest(out, u.credential_hash);
    append_u32(out, static_cast<std::uint32_t>(u.assigned_role_ids.size()));
    for (auto id : u.assigned_role_ids) append_u64(out, id);
    append_u32(out, static_cast<std::uint32_t>(u.group_ids.size()));
    for (const auto& g : u.group_ids) append_string(out, g);
}

inline UserRecord read_user(ByteReader& r) {
    UserRecord u;
    u.user_id = r.u64();
    u.tenant_id = r.string();
    u.username = r.string();
    u.salt = r.bytes();
    u.credential_hash = read_digest(r);
    std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) u.assigned_role_ids.push_back(r.u64());
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) u.group_ids.push_back(r.string());
    return u;
}

inline void append_group(Bytes& out, const GroupRecord& g) {
    append_string(out, g.group_id);
    append_string(out, g.tenant_id);
    append_bytes(out, g.salt);
    append_digest(out, g.group_key_hash);
    append_u32(out, static_cast<std::uint32_t>(g.role_ids.size()));
    for (auto id : g.role_ids) append_u64(out, id);
    append_u32(out, static_cast<std::uint32_t>(g.member_user_ids.size()));
    for (auto id : g.member_user_ids) append_u64(out, id);
}

inline GroupRecord read_group(ByteReader& r) {
    GroupRecord g;
    g.group_id = r.string();
    g.tenant_id = r.string();
    g.salt = r.bytes();
    g.group_key_hash = read_digest(r);
    std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) g.role_ids.push_back(r.u64());
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) g.member_user_ids.push_back(r.u64());
    return g;
}

inline void append_role_node(Bytes& out, const hierarchy::RoleNode& n) {
    append_u64(out, n.role_id);
    append_string(out, n.tenant_id);
    append_string(out, n.name);
    append_u32(out, static_cast<std::uint32_t>(n.lft));
    append_u32(out, static_cast<std::uint32_t>(n.rgt));
    append_permissions(out, n.permissions);
    append_u8(out, n.sensitive_allowed ? 1 : 0);
}

inline hierarchy::RoleNode read_role_node(ByteReader& r) {
    hierarchy::RoleNode n;
    n.role_id = r.u64();
    n.tenant_id = r.string();
    n.name = r.string();
    n.lft = static_cast<int>(r.u32());
    n.rgt = static_cast<int>(r.u32());
    n.permissions = read_permissions(r);
    n.sensitive_allowed = r.u8() != 0;
    return n;
}

inline void append_schema(Bytes& out, const TableSchema& s) {
    append_string(out, s.name);
    append_u32(out, static_cast<std::uint32_t>(s.columns.size()));
    for (const auto& c : s.columns) append_string(out, c);
    append_u32(out, static_cast<std::uint32_t>(s.sensitive.size()));
    for (const auto& c : s.sensitive) append_string(out, c);
}

inline TableSchema read_schema(ByteReader& r) {
    TableSchema s;
    s.name = r.string();
    std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) s.columns.push_back(r.string());
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) s.sensitive.insert(r.string());
    return s;
}

inline void append_row(Bytes& out, const std::string& table, const DataRow& row) {
    append_string(out, table);
    append_u64(out, row.row_id);
    append_string(out, row.tenant_id);
    append_u32(out, static_cast<std::uint32_t>(row.cells.size()));
    for (const auto& [col, cell] : row.cells) {
        append_string(out, col);
        append_cell(out, cell);
    }
}

inline std::pair<std::string, DataRow> read_row(ByteReader& r) {
    std::string table = r.string();
    DataRow row;
    row.row_id = r.u64();
    row.tenant_id = r.string();
    std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string col = r.string();
        row.cells.emplace(std::move(col), read_cell(r));
    }
    return {std::move(table), std::move(row)};
}

} // namespace rolegate::catalog
