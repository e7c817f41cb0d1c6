#pragma once

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

#include "rolegate/errors.hpp"
#include "rolegate/sql/ast.hpp"

namespace rolegate::sql {

// Recursive-descent parser for the supported subset:
//
//   SELECT col [, col]* | * FROM table [WHERE cond [AND cond]*]
//   INSERT INTO table ( col [, col]* ) VALUES ( lit [, lit]* )
//   UPDATE table SET col = lit [, col = lit]* [WHERE ...]
//   DELETE FROM table [WHERE ...]
//   cond := col (= | < | > | <= | >= | <>) lit
//   lit  := integer | 'string'
//
// Keywords are case-insensitive; identifiers keep their case. Joins,
// subqueries, OR/NOT and aggregation are recognized and rejected as
// UnsupportedFeature rather than SyntaxError. Offsets are 1-based bytes.

namespace detail {

enum class Tok {
    ident, integer, str,
    comma, lparen, rparen, star, semi, minus,
    op_eq, op_lt, op_gt, op_le, op_ge, op_ne,
    end,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;      // identifier spelling (original case)
    std::string upper;     // identifier spelling, uppercased
    std::int64_t int_value = 0;
    std::string str_value; // decoded string literal
    std::size_t pos = 0;   // 1-based byte offset
};

inline const std::unordered_set<std::string>& unsupported_keywords() {
    static const std::unordered_set<std::string> kws = {
        "JOIN", "INNER", "OUTER", "LEFT", "RIGHT", "CROSS", "ON", "UNION",
        "OR", "NOT", "IN", "LIKE", "BETWEEN", "IS", "NULL", "GROUP", "ORDER",
        "HAVING", "LIMIT", "OFFSET", "DISTINCT", "AS", "EXISTS", "COUNT",
        "SUM", "AVG", "MIN", "MAX",
    };
    return kws;
}

inline const std::unordered_set<std::string>& reserved_keywords() {
    static const std::unordered_set<std::string> kws = {
        "SELECT", "FROM", "WHERE", "AND", "INSERT", "INTO", "VALUES",
        "UPDATE", "SET", "DELETE",
    };
    return kws;
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) i_++;
        Token t;
        t.pos = i_ + 1;
        if (i_ >= text_.size()) return t;

        char c = text_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i_;
            while (i_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
                i_++;
            }
            t.kind = Tok::ident;
            t.text = std::string(text_.substr(start, i_ - start));
            t.upper = t.text;
            for (char& ch : t.upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) i_++;
            t.kind = Tok::integer;
            auto s = text_.substr(start, i_ - start);
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), t.int_value);
            if (ec != std::errc{} || p != s.data() + s.size()) {
                throw Error(Errc::syntax_error, "integer literal out of range", t.pos);
            }
            return t;
        }
        if (c == '\'') {
            std::size_t start = i_++;
            std::string out;
            for (;;) {
                if (i_ >= text_.size()) {
                    throw Error(Errc::syntax_error, "unterminated string literal", start + 1);
                }
                if (text_[i_] == '\'') {
                    if (i_ + 1 < text_.size() && text_[i_ + 1] == '\'') {
                        out.push_back('\'');
                        i_ += 2;
                        continue;
                    }
                    i_++;
                    break;
                }
                out.push_back(text_[i_++]);
            }
            t.kind = Tok::str;
            t.str_value = std::move(out);
            return t;
        }

        i_++;
        switch (c) {
            case ',': t.kind = Tok::comma; return t;
            case '(': t.kind = Tok::lparen; return t;
            case ')': t.kind = Tok::rparen; return t;
            case '*': t.kind = Tok::star; return t;
            case ';': t.kind = Tok::semi; return t;
            case '-': t.kind = Tok::minus; return t;
            case '=': t.kind = Tok::op_eq; return t;
            case '<':
                if (i_ < text_.size() && text_[i_] == '=') { i_++; t.kind = Tok::op_le; return t; }
                if (i_ < text_.size() && text_[i_] == '>') { i_++; t.kind = Tok::op_ne; return t; }
                t.kind = Tok::op_lt;
                return t;
            case '>':
                if (i_ < text_.size() && text_[i_] == '=') { i_++; t.kind = Tok::op_ge; return t; }
                t.kind = Tok::op_gt;
                return t;
        }
        throw Error(Errc::syntax_error, std::string("unexpected character '") + c + "'", t.pos);
    }

private:
    std::string_view text_;
    std::size_t i_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) { advance(); }

    ParsedQuery parse() {
        ParsedQuery q;
        if (cur_.kind != Tok::ident) {
            throw Error(Errc::syntax_error, "expected a statement keyword", cur_.pos);
        }
        if (cur_.upper == "SELECT") {
            q = parse_select();
        } else if (cur_.upper == "INSERT") {
            q = parse_insert();
        } else if (cur_.upper == "UPDATE") {
            q = parse_update();
        } else if (cur_.upper == "DELETE") {
            q = parse_delete();
        } else {
            reject_unsupported();
            throw Error(Errc::syntax_error, "unknown statement: " + cur_.text, cur_.pos);
        }
        if (cur_.kind == Tok::semi) advance();
        if (cur_.kind != Tok::end) {
            reject_unsupported();
            throw Error(Errc::syntax_error, "trailing input after statement", cur_.pos);
        }
        return q;
    }

private:
    ParsedQuery parse_select() {
        ParsedQuery q;
        q.kind = Action::select;
        advance();
        if (cur_.kind == Tok::star) {
            q.select_star = true;
            advance();
        } else {
            q.select_columns.push_back(column_name());
            while (cur_.kind == Tok::comma) {
                advance();
                q.select_columns.push_back(column_name());
            }
        }
        expect_keyword("FROM");
        q.table = table_name();
        parse_optional_where(q);
        return q;
    }

    ParsedQuery parse_insert() {
        ParsedQuery q;
        q.kind = Action::insert;
        advance();
        expect_keyword("INTO");
        q.table = table_name();
        expect(Tok::lparen, "(");
        q.insert_columns.push_back(column_name());
        while (cur_.kind == Tok::comma) {
            advance();
            q.insert_columns.push_back(column_name());
        }
        expect(Tok::rparen, ")");
        expect_keyword("VALUES");
        expect(Tok::lparen, "(");
        q.insert_values.push_back(literal());
        while (cur_.kind == Tok::comma) {
            advance();
            q.insert_values.push_back(literal());
        }
        std::size_t close_pos = cur_.pos;
        expect(Tok::rparen, ")");
        if (q.insert_columns.size() != q.insert_values.size()) {
            throw Error(Errc::syntax_error, "column count does not match value count", close_pos);
        }
        return q;
    }

    ParsedQuery parse_update() {
        ParsedQuery q;
        q.kind = Action::update;
        advance();
        q.table = table_name();
        expect_keyword("SET");
        q.assignments.push_back(assignment());
        while (cur_.kind == Tok::comma) {
            advance();
            q.assignments.push_back(assignment());
        }
        parse_optional_where(q);
        return q;
    }

    ParsedQuery parse_delete() {
        ParsedQuery q;
        q.kind = Action::del;
        advance();
        expect_keyword("FROM");
        q.table = table_name();
        parse_optional_where(q);
        return q;
    }

    void parse_optional_where(ParsedQuery& q) {
        if (cur_.kind == Tok::ident && cur_.upper == "WHERE") {
            advance();
            q.where.push_back(condition());
            while (cur_.kind == Tok::ident && cur_.upper == "AND") {
                advance();
                q.where.push_back(condition());
            }
        }
        if (cur_.kind == Tok::ident) reject_unsupported();
    }

    Condition condition() {
        Condition c;
        c.column = column_name();
        switch (cur_.kind) {
            case Tok::op_eq: c.op = Op::eq; break;
            case Tok::op_lt: c.op = Op::lt; break;
            case Tok::op_gt: c.op = Op::gt; break;
            case Tok::op_le: c.op = Op::le; break;
            case Tok::op_ge: c.op = Op::ge; break;
            case Tok::op_ne: c.op = Op::ne; break;
            default:
                reject_unsupported();
                throw Error(Errc::syntax_error, "expected a comparison operator", cur_.pos);
        }
        advance();
        c.literal = literal();
        return c;
    }

    Assignment assignment() {
        Assignment a;
        a.column = column_name();
        expect(Tok::op_eq, "=");
        a.literal = literal();
        return a;
    }

    Literal literal() {
        Literal lit;
        lit.position = cur_.pos;
        if (cur_.kind == Tok::minus) {
            advance();
            if (cur_.kind != Tok::integer) {
                throw Error(Errc::syntax_error, "expected an integer after '-'", cur_.pos);
            }
            lit.value = -cur_.int_value;
            advance();
            return lit;
        }
        if (cur_.kind == Tok::integer) {
            lit.value = cur_.int_value;
            advance();
            return lit;
        }
        if (cur_.kind == Tok::str) {
            lit.value = cur_.str_value;
            advance();
            return lit;
        }
        if (cur_.kind == Tok::lparen) {
            throw Error(Errc::unsupported_feature, "subqueries are not supported", cur_.pos);
        }
        reject_unsupported();
        throw Error(Errc::syntax_error, "expected a literal", cur_.pos);
    }

    std::string column_name() {
        std::string name = identifier("column name");
        if (cur_.kind == Tok::lparen) {
            throw Error(Errc::unsupported_feature,
                        "function calls and aggregation are not supported", cur_.pos);
        }
        return name;
    }

    std::string table_name() {
        std::string name = identifier("table name");
        return name;
    }

    std::string identifier(const char* what) {
        if (cur_.kind != Tok::ident || reserved_keywords().contains(cur_.upper)) {
            throw Error(Errc::syntax_error, std::string("expected a ") + what, cur_.pos);
        }
        reject_unsupported();
        std::string name = cur_.text;
        advance();
        return name;
    }

    void expect_keyword(const char* kw) {
        if (cur_.kind != Tok::ident || cur_.upper != kw) {
            reject_unsupported();
            throw Error(Errc::syntax_error, std::string("expected ") + kw, cur_.pos);
        }
        advance();
    }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) {
            reject_unsupported();
            throw Error(Errc::syntax_error, std::string("expected '") + what + "'", cur_.pos);
        }
        advance();
    }

    void reject_unsupported() {
        if (cur_.kind == Tok::ident && unsupported_keywords().contains(cur_.upper)) {
            throw Error(Errc::unsupported_feature, cur_.upper + " is not supported", cur_.pos);
        }
    }

    void advance() { cur_ = lex_.next(); }

    Lexer lex_;
    Token cur_;
};

} // namespace detail

inline constexpr std::size_t kMaxQueryBytes = 64 * 1024;

inline ParsedQuery parse(std::string_view query_text) {
    if (query_text.size() > kMaxQueryBytes) {
        throw Error(Errc::syntax_error, "query exceeds 64 KiB", kMaxQueryBytes + 1);
    }
    return detail::Parser(query_text).parse();
}

} // namespace rolegate::sql
