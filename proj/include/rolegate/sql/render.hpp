#pragma once

#include <string>

#include "rolegate/sql/ast.hpp"

namespace rolegate::sql {

// Canonical rendering: uppercase keywords, single spaces, single-quoted
// strings with '' escaping, no trailing semicolon. render(parse(q)) is the
// canonical form of q and reparses to an equal ParsedQuery.

inline std::string render_value(const Value& v) {
    if (std::holds_alternative<std::int64_t>(v)) {
        return std::to_string(std::get<std::int64_t>(v));
    }
    std::string out = "'";
    for (char c : std::get<std::string>(v)) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
    }
    out.push_back('\'');
    return out;
}

inline std::string render(const ParsedQuery& q) {
    std::string out;
    auto join_columns = [&](const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out += ", ";
            out += cols[i];
        }
    };
    auto render_where = [&] {
        if (q.where.empty()) return;
        out += " WHERE ";
        for (std::size_t i = 0; i < q.where.size(); ++i) {
            if (i) out += " AND ";
            const Condition& c = q.where[i];
            out += c.column;
            out += ' ';
            out += op_text(c.op);
            out += ' ';
            out += render_value(c.literal.value);
        }
    };

    switch (q.kind) {
        case Action::select:
            out = "SELECT ";
            if (q.select_star) {
                out += '*';
            } else {
                join_columns(q.select_columns);
            }
            out += " FROM ";
            out += q.table;
            render_where();
            break;
        case Action::insert:
            out = "INSERT INTO ";
            out += q.table;
            out += " (";
            join_columns(q.insert_columns);
            out += ") VALUES (";
            for (std::size_t i = 0; i < q.insert_values.size(); ++i) {
                if (i) out += ", ";
                out += render_value(q.insert_values[i].value);
            }
            out += ')';
            break;
        case Action::update:
            out = "UPDATE ";
            out += q.table;
            out += " SET ";
            for (std::size_t i = 0; i < q.assignments.size(); ++i) {
                if (i) out += ", ";
                out += q.assignments[i].column;
                out += " = ";
                out += render_value(q.assignments[i].literal.value);
            }
            render_where();
            break;
        case Action::del:
            out = "DELETE FROM ";
            out += q.table;
            render_where();
            break;
    }
    return out;
}

} // namespace rolegate::sql
