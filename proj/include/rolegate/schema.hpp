#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace rolegate {

/// Column layout of one tenant data table. `sensitive` names the columns in
/// the sensitive-column registry: stored Paillier-encrypted, touchable only
/// with the extra sensitive grant.
struct TableSchema {
    std::string name;
    std::vector<std::string> columns; // declaration order
    std::set<std::string> sensitive;

    bool has_column(const std::string& c) const {
        return std::find(columns.begin(), columns.end(), c) != columns.end();
    }
    bool is_sensitive(const std::string& c) const { return sensitive.contains(c); }
};

} // namespace rolegate
