#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rolegate/permission.hpp"

namespace rolegate::sql {

using Value = std::variant<std::int64_t, std::string>;

enum class Op { eq, lt, gt, le, ge, ne };

inline std::string_view op_text(Op op) {
    switch (op) {
        case Op::eq: return "=";
        case Op::lt: return "<";
        case Op::gt: return ">";
        case Op::le: return "<=";
        case Op::ge: return ">=";
        case Op::ne: return "<>";
    }
    return "?";
}

/// `position` is the literal's 1-based byte offset in the source text —
/// provenance for error reporting and encryption bookkeeping, not identity.
/// Two literals are equal when their values are.
struct Literal {
    Value value;
    std::size_t position = 0;

    friend bool operator==(const Literal& a, const Literal& b) { return a.value == b.value; }
};

struct Condition {
    std::string column;
    Op op = Op::eq;
    Literal literal;

    friend bool operator==(const Condition&, const Condition&) = default;
};

struct Assignment {
    std::string column;
    Literal literal;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// A literal attributed to the column it compares against or assigns into.
struct LiteralBinding {
    std::string column;
    Value value;
    std::size_t position = 0;
};

struct ParsedQuery {
    Action kind = Action::select;
    std::string table;
    bool select_star = false;
    std::vector<std::string> select_columns;
    std::vector<Condition> where; // conjunction
    std::vector<Assignment> assignments;
    std::vector<std::string> insert_columns;
    std::vector<Literal> insert_values;

    std::set<std::string> where_columns() const {
        std::set<std::string> out;
        for (const auto& c : where) out.insert(c.column);
        return out;
    }

    /// Every column the query touches, across all clause buckets.
    std::set<std::string> referenced_columns() const {
        std::set<std::string> out(select_columns.begin(), select_columns.end());
        for (const auto& c : where) out.insert(c.column);
        for (const auto& a : assignments) out.insert(a.column);
        out.insert(insert_columns.begin(), insert_columns.end());
        return out;
    }

    /// All literals with the column each is bound to, in clause order.
    std::vector<LiteralBinding> literals() const {
        std::vector<LiteralBinding> out;
        for (std::size_t i = 0; i < insert_values.size(); ++i) {
            out.push_back({insert_columns[i], insert_values[i].value, insert_values[i].position});
        }
        for (const auto& a : assignments) {
            out.push_back({a.column, a.literal.value, a.literal.position});
        }
        for (const auto& c : where) {
            out.push_back({c.column, c.literal.value, c.literal.position});
        }
        return out;
    }

    friend bool operator==(const ParsedQuery&, const ParsedQuery&) = default;
};

} // namespace rolegate::sql
