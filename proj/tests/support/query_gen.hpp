#pragma once

// Random statement generator for parser round-trip properties, plus a
// "messy" renderer that varies keyword case and whitespace to make sure the
// parser does not depend on the canonical layout.

#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rolegate/sql/ast.hpp"
#include "rolegate/sql/render.hpp"

namespace query_gen {

using rolegate::Action;
using rolegate::sql::Assignment;
using rolegate::sql::Condition;
using rolegate::sql::Literal;
using rolegate::sql::Op;
using rolegate::sql::ParsedQuery;
using rolegate::sql::Value;

inline const std::vector<std::string>& column_pool() {
    static const std::vector<std::string> cols = {
        "a", "b", "c", "name", "dept", "salary", "id", "col_1", "Phone", "x_9",
    };
    return cols;
}

inline const std::vector<std::string>& table_pool() {
    static const std::vector<std::string> tables = {
        "employees", "accounts", "t1_data", "Ledger",
    };
    return tables;
}

inline Value random_value(std::mt19937_64& rng) {
    static const std::vector<std::string> strings = {
        "",
        "CS",
        "it's",
        "two words",
        "quote'quote'",
        "trail ",
        " lead",
        "na\xc3\xafve",
        "semi;colon",
        "a*b, (c)",
    };
    if (rng() % 2) {
        // Signed 64-bit, biased toward small values.
        if (rng() % 3 == 0) return static_cast<std::int64_t>(rng());
        return static_cast<std::int64_t>(static_cast<std::int64_t>(rng() % 2001) - 1000);
    }
    return strings[rng() % strings.size()];
}

inline std::vector<std::string> sample_columns(std::mt19937_64& rng, std::size_t count) {
    std::vector<std::string> pool = column_pool();
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(count);
    return pool;
}

inline std::vector<Condition> random_where(std::mt19937_64& rng) {
    std::vector<Condition> out;
    std::size_t n = rng() % 4; // 0..3 conjuncts
    for (std::size_t i = 0; i < n; ++i) {
        Condition c;
        c.column = column_pool()[rng() % column_pool().size()];
        c.op = static_cast<Op>(rng() % 6);
        c.literal = Literal{random_value(rng), 0};
        out.push_back(std::move(c));
    }
    return out;
}

inline ParsedQuery random_query(std::mt19937_64& rng) {
    ParsedQuery q;
    q.table = table_pool()[rng() % table_pool().size()];
    switch (rng() % 4) {
        case 0: {
            q.kind = Action::select;
            if (rng() % 5 == 0) {
                q.select_star = true;
            } else {
                q.select_columns = sample_columns(rng, 1 + rng() % 4);
            }
            q.where = random_where(rng);
            break;
        }
        case 1: {
            q.kind = Action::insert;
            q.insert_columns = sample_columns(rng, 1 + rng() % 4);
            for (std::size_t i = 0; i < q.insert_columns.size(); ++i) {
                q.insert_values.push_back(Literal{random_value(rng), 0});
            }
            break;
        }
        case 2: {
            q.kind = Action::update;
            for (const auto& col : sample_columns(rng, 1 + rng() % 3)) {
                q.assignments.push_back(Assignment{col, Literal{random_value(rng), 0}});
            }
            q.where = random_where(rng);
            break;
        }
        default: {
            q.kind = Action::del;
            q.where = random_where(rng);
            break;
        }
    }
    return q;
}

// Rebuilds the statement text with randomized keyword case, gratuitous
// whitespace, and an optional trailing semicolon. Identifiers and string
// contents are copied verbatim (they are case-sensitive).
inline std::string messy_render(const ParsedQuery& q, std::mt19937_64& rng) {
    static const std::set<std::string> keywords = {
        "SELECT", "FROM", "WHERE", "AND", "INSERT", "INTO", "VALUES",
        "UPDATE", "SET", "DELETE",
    };
    std::string canonical = rolegate::sql::render(q);
    std::string out;
    bool in_string = false;
    std::size_t i = 0;
    while (i < canonical.size()) {
        char c = canonical[i];
        if (c == '\'') {
            in_string = !in_string;
            out.push_back(c);
            ++i;
            continue;
        }
        if (in_string) {
            out.push_back(c);
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            while (i < canonical.size() &&
                   (std::isalnum(static_cast<unsigned char>(canonical[i])) ||
                    canonical[i] == '_')) {
                ++i;
            }
            std::string word = canonical.substr(start, i - start);
            if (keywords.contains(word)) {
                for (char& ch : word) {
                    if (rng() % 2) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
                }
            }
            out += word;
            continue;
        }
        if (c == ' ') {
            std::size_t n = 1 + rng() % 3;
            for (std::size_t k = 0; k < n; ++k) out += (rng() % 4 == 0) ? "\t" : " ";
            ++i;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    if (rng() % 2) out += ";";
    if (rng() % 3 == 0) out.insert(out.begin(), ' ');
    return out;
}

} // namespace query_gen
