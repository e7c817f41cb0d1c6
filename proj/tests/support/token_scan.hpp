#pragma once

// Naive column-reference scan, independent of the real parser: walk the raw
// query text, skip string literals and numbers, collect identifier tokens,
// drop keywords and the single identifier that names the table (the one
// right after FROM / INTO / UPDATE).

#include <cctype>
#include <set>
#include <string>

namespace token_scan {

inline std::set<std::string> columns(const std::string& text) {
    static const std::set<std::string> keywords = {
        "SELECT", "FROM", "WHERE", "AND", "INSERT", "INTO", "VALUES",
        "UPDATE", "SET", "DELETE",
    };
    std::set<std::string> out;
    bool next_is_table = false;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\'') {
            ++i;
            while (i < text.size()) {
                if (text[i] == '\'' && i + 1 < text.size() && text[i + 1] == '\'') {
                    i += 2;
                    continue;
                }
                if (text[i] == '\'') { ++i; break; }
                ++i;
            }
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                                       text[i] == '_')) {
                ++i;
            }
            std::string word = text.substr(start, i - start);
            std::string upper = word;
            for (char& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            if (keywords.contains(upper)) {
                next_is_table = upper == "FROM" || upper == "INTO" || upper == "UPDATE";
            } else if (next_is_table) {
                next_is_table = false;
            } else {
                out.insert(word);
            }
            continue;
        }
        ++i;
    }
    return out;
}

} // namespace token_scan
