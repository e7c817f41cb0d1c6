#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rolegate/crypto/encoding.hpp"
#include "rolegate/errors.hpp"
#include "rolegate/permission.hpp"
#include "rolegate/schema.hpp"
#include "rolegate/sql/ast.hpp"
#include "rolegate/sql/render.hpp"

namespace rolegate::sql {

/// Policy row filter: a conjunct the gateway appends to WHERE-capable
/// statements regardless of what the user asked for.
struct RowFilter {
    std::string column;
    Op op = Op::eq;
    Value value;
};

struct RegeneratedQuery {
    std::string text;                           // canonical, ciphertexts inlined
    ParsedQuery parsed;                         // same statement, post-substitution
    std::vector<std::size_t> encrypted_positions; // source offsets of replaced literals
    std::vector<std::string> applied_filters;   // rendered policy conjuncts
};

// Ciphertext literals travel inside the regenerated SQL as strings tagged
// with a short prefix; the row store unwraps them back into blob cells.
inline constexpr std::string_view kCipherPrefix = "pc1:";

inline std::string make_cipher_literal(const Bytes& blob) {
    return std::string(kCipherPrefix) + to_hex(blob);
}

inline bool is_cipher_literal(const Value& v) {
    return std::holds_alternative<std::string>(v) &&
           std::get<std::string>(v).starts_with(kCipherPrefix);
}

inline Bytes cipher_literal_bytes(const Value& v) {
    return from_hex(std::string_view(std::get<std::string>(v)).substr(kCipherPrefix.size()));
}

namespace detail {

template <typename Encrypt>
void substitute(Literal& lit, const std::string& column, const TableSchema& schema,
                Encrypt&& encrypt, std::vector<std::size_t>& positions) {
    if (!schema.is_sensitive(column)) return;
    Bytes blob = encrypt(lit.value);
    if (lit.position != 0) positions.push_back(lit.position);
    lit.value = make_cipher_literal(blob);
}

} // namespace detail

/// Builds the authorized statement: expands SELECT * against the grant,
/// Paillier-encrypts every literal bound to a sensitive column, and appends
/// policy row filters as WHERE conjuncts. Callers have already checked
/// admissibility, so this never widens access.
template <typename Rng>
RegeneratedQuery regenerate(const ParsedQuery& query, const ColumnGrant& grant,
                            const std::vector<RowFilter>& filters,
                            const TableSchema& schema,
                            const crypto::paillier::EncryptionKey& key, Rng& rng,
                            bool deterministic_r = false) {
    RegeneratedQuery out;
    out.parsed = query;
    ParsedQuery& q = out.parsed;

    auto encrypt = [&](const Value& v) -> Bytes {
        crypto::PlainValue pv = std::holds_alternative<std::int64_t>(v)
                                    ? crypto::PlainValue(std::get<std::int64_t>(v))
                                    : crypto::PlainValue(std::get<std::string>(v));
        return deterministic_r ? crypto::encrypt_value_deterministic(key, pv)
                               : crypto::encrypt_value(key, pv, rng);
    };

    if (q.select_star) {
        q.select_star = false;
        for (const std::string& col : schema.columns) {
            if (!grant.columns.contains(col)) continue;
            // A sensitive column the caller lacks the extra grant on is
            // silently left out of the expansion rather than denying the
            // whole star query.
            if (schema.is_sensitive(col) && !grant.sensitive_columns.contains(col)) continue;
            q.select_columns.push_back(col);
        }
        if (q.select_columns.empty()) {
            throw Error(Errc::column_denied, "no accessible columns in " + q.table,
                        std::vector<std::string>{"*"});
        }
    }

    for (std::size_t i = 0; i < q.insert_values.size(); ++i) {
        detail::substitute(q.insert_values[i], q.insert_columns[i], schema, encrypt,
                           out.encrypted_positions);
    }
    for (Assignment& a : q.assignments) {
        detail::substitute(a.literal, a.column, schema, encrypt, out.encrypted_positions);
    }
    for (Condition& c : q.where) {
        detail::substitute(c.literal, c.column, schema, encrypt, out.encrypted_positions);
    }

    if (q.kind != Action::insert) {
        for (const RowFilter& f : filters) {
            Condition c;
            c.column = f.column;
            c.op = f.op;
            c.literal = Literal{f.value, 0};
            out.applied_filters.push_back(f.column + " " + std::string(op_text(f.op)) +
                                          " " + render_value(f.value));
            detail::substitute(c.literal, c.column, schema, encrypt,
                               out.encrypted_positions);
            q.where.push_back(std::move(c));
        }
    }

    out.text = render(q);
    return out;
}

} // namespace rolegate::sql
