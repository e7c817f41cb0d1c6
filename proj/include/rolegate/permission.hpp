#pragma once

#include <cctype>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>

#include "rolegate/errors.hpp"

namespace rolegate {

enum class Action { select, insert, update, del };

inline std::string_view action_name(Action a) {
    switch (a) {
        case Action::select: return "SELECT";
        case Action::insert: return "INSERT";
        case Action::update: return "UPDATE";
        case Action::del: return "DELETE";
    }
    return "?";
}

inline Action parse_action(std::string_view s) {
    std::string up(s);
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "SELECT") return Action::select;
    if (up == "INSERT") return Action::insert;
    if (up == "UPDATE") return Action::update;
    if (up == "DELETE") return Action::del;
    throw Error(Errc::invalid_argument, "unknown action: " + std::string(s));
}

/// A column-scoped rule: one action on one table over a set of columns.
/// `sensitive` marks the extra right needed to touch sensitive columns.
struct Permission {
    Action action = Action::select;
    std::string table;
    std::set<std::string> columns;
    bool sensitive = false;

    friend auto operator<=>(const Permission&, const Permission&) = default;
};

using PermissionSet = std::set<Permission>;

/// Single-column grant. Permission math (activation deltas, revocation,
/// coverage checks) runs on these so overlapping column sets in different
/// Permission entries cannot hide shared access.
struct Grant {
    Action action = Action::select;
    std::string table;
    std::string column;
    bool sensitive = false;

    friend auto operator<=>(const Grant&, const Grant&) = default;
};

using GrantSet = std::set<Grant>;

inline GrantSet atomize(const PermissionSet& perms) {
    GrantSet out;
    for (const auto& p : perms) {
        for (const auto& col : p.columns) {
            out.insert(Grant{p.action, p.table, col, p.sensitive});
        }
    }
    return out;
}

/// Regroups grants into one Permission per (action, table, sensitive).
inline PermissionSet regroup(const GrantSet& grants) {
    std::map<std::tuple<Action, std::string, bool>, std::set<std::string>> groups;
    for (const auto& g : grants) {
        groups[{g.action, g.table, g.sensitive}].insert(g.column);
    }
    PermissionSet out;
    for (auto& [key, cols] : groups) {
        out.insert(Permission{std::get<0>(key), std::get<1>(key), std::move(cols),
                              std::get<2>(key)});
    }
    return out;
}

inline GrantSet grant_union(const GrantSet& a, const GrantSet& b) {
    GrantSet out = a;
    out.insert(b.begin(), b.end());
    return out;
}

inline GrantSet grant_difference(const GrantSet& a, const GrantSet& b) {
    GrantSet out;
    for (const auto& g : a) {
        if (!b.contains(g)) out.insert(g);
    }
    return out;
}

/// Col_ret for one (action, table): every column the caller may touch, plus
/// the subset it holds the sensitive-access right on.
struct ColumnGrant {
    std::string table;
    std::set<std::string> columns;
    std::set<std::string> sensitive_columns; // subset of columns

    friend auto operator<=>(const ColumnGrant&, const ColumnGrant&) = default;
};

} // namespace rolegate
