#pragma once

#include <charconv>
#include <sstream>
#include <string>
#include <vector>

#include "rolegate/catalog/store.hpp"
#include "rolegate/sql/parser.hpp"

namespace rolegate::catalog {

// Line-oriented fixture language for seeding a catalog. One command per line,
// '#' starts a comment. Used by tests, the admin CLI's `seed` command and the
// benchmark harness, so every scenario flows through the same code path.
//
//   tenant <id> <name> <key_bits>
//   tenant_primes <id> <name> <p1> <p2>
//   table <tenant> <name> <col> [col ...]
//   sensitive <tenant> <table> <col>
//   role <tenant> <parent|-> <name>
//   perm <tenant> <role> <action> <table> <plain|sensitive> <col> [col ...]
//   user <tenant> <username> <password>
//   assign <tenant> <username> <role>
//   group <tenant> <group_id> <group_key>
//   groupadd <tenant> <group_id> <username>
//   grouprole <tenant> <group_id> <role>
//   filter <tenant> <table> <col> <op> <value>
//   policy <tenant> <role> window <start_hour> <end_hour>
//   policy <tenant> <role> maxconc <n>
//   sql <tenant> <statement>
class FixtureLoader {
public:
    FixtureLoader(Catalog& cat, crypto::Mt19937_64& rng) : cat_(cat), rng_(rng) {}

    void run(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            try {
                apply(line);
            } catch (const Error& e) {
                throw Error(e.code(), "fixture line " + std::to_string(lineno) + ": " +
                                          e.what());
            }
        }
    }

    /// Parses, authorizes-as-admin and executes one statement. Seeding rows
    /// through the real pipeline keeps sensitive cells encrypted exactly as
    /// gateway traffic would produce them.
    ResultSet run_sql(const std::string& tenant, const std::string& text) {
        sql::ParsedQuery q = sql::parse(text);
        TableSchema schema = cat_.table_schema(q.table);
        ColumnGrant grant;
        grant.table = schema.name;
        for (const std::string& c : schema.columns) {
            grant.columns.insert(c);
            if (schema.is_sensitive(c)) grant.sensitive_columns.insert(c);
        }
        auto enc = cat_.enc_key(tenant);
        sql::RegeneratedQuery rq = sql::regenerate(q, grant, {}, schema, enc, rng_);
        return cat_.execute(tenant, rq.parsed);
    }

    void apply(const std::string& raw) {
        std::string line = raw.substr(0, raw.find('#'));
        std::vector<std::string> t = split(line);
        if (t.empty()) return;
        const std::string& cmd = t[0];

        if (cmd == "tenant") {
            need(t, 4);
            auto keys = crypto::paillier::keygen(parse_int(t[3]), rng_);
            cat_.create_tenant(t[1], t[2], keys);
        } else if (cmd == "tenant_primes") {
            need(t, 5);
            auto keys = crypto::paillier::keygen_from_primes(crypto::BigInt(t[3]),
                                                             crypto::BigInt(t[4]), rng_);
            cat_.create_tenant(t[1], t[2], keys);
        } else if (cmd == "table") {
            need(t, 4);
            cat_.create_table(t[1], t[2], {t.begin() + 3, t.end()});
        } else if (cmd == "sensitive") {
            need(t, 4);
            cat_.mark_sensitive_column(t[1], t[2], t[3]);
        } else if (cmd == "role") {
            need(t, 4);
            std::optional<std::string> parent;
            if (t[2] != "-") parent = t[2];
            cat_.create_role(t[1], parent, t[3], {});
        } else if (cmd == "perm") {
            need(t, 7);
            Permission p;
            p.action = parse_action(t[3]);
            p.table = t[4];
            p.sensitive = parse_sensitivity(t[5]);
            p.columns.insert(t.begin() + 6, t.end());
            cat_.grant_permission(t[1], t[2], p);
        } else if (cmd == "user") {
            need(t, 4);
            cat_.register_user(t[1], t[2], t[3]);
        } else if (cmd == "assign") {
            need(t, 4);
            cat_.assign_role(t[1], t[2], t[3]);
        } else if (cmd == "group") {
            need(t, 4);
            cat_.create_group(t[1], t[2], t[3]);
        } else if (cmd == "groupadd") {
            need(t, 4);
            cat_.add_group_member(t[1], t[2], t[3]);
        } else if (cmd == "grouprole") {
            need(t, 4);
            cat_.add_group_role(t[1], t[2], t[3]);
        } else if (cmd == "filter") {
            need(t, 6);
            sql::RowFilter f;
            f.column = t[3];
            f.op = parse_op(t[4]);
            f.value = parse_value(t[5]);
            cat_.add_row_filter(t[1], t[2], std::move(f));
        } else if (cmd == "policy") {
            need(t, 5);
            RolePolicy p = cat_.role_policy(t[1], cat_.role_id_by_name(t[1], t[2]));
            if (t[3] == "window") {
                need(t, 6);
                p.window_start_hour = parse_int(t[4]);
                p.window_end_hour = parse_int(t[5]);
            } else if (t[3] == "maxconc") {
                p.max_concurrent = static_cast<std::uint32_t>(parse_int(t[4]));
            } else {
                throw Error(Errc::config_error, "unknown policy kind: " + t[3]);
            }
            cat_.set_role_policy(t[1], t[2], p);
        } else if (cmd == "sql") {
            need(t, 3);
            std::size_t at = line.find(t[1]);
            run_sql(t[1], line.substr(at + t[1].size()));
        } else {
            throw Error(Errc::config_error, "unknown fixture command: " + cmd);
        }
    }

private:
    static std::vector<std::string> split(const std::string& line) {
        std::istringstream in(line);
        std::vector<std::string> out;
        std::string tok;
        while (in >> tok) out.push_back(tok);
        return out;
    }

    static void need(const std::vector<std::string>& t, std::size_t n) {
        if (t.size() < n) {
            throw Error(Errc::config_error, "command " + t[0] + " needs at least " +
                                                std::to_string(n - 1) + " arguments");
        }
    }

    static int parse_int(const std::string& s) {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
            throw Error(Errc::config_error, "not a number: " + s);
        }
        return v;
    }

    static bool parse_sensitivity(const std::string& s) {
        if (s == "sensitive") return true;
        if (s == "plain") return false;
        throw Error(Errc::config_error, "expected plain|sensitive, got " + s);
    }

    static sql::Op parse_op(const std::string& s) {
        if (s == "=") return sql::Op::eq;
        if (s == "<") return sql::Op::lt;
        if (s == ">") return sql::Op::gt;
        if (s == "<=") return sql::Op::le;
        if (s == ">=") return sql::Op::ge;
        if (s == "<>") return sql::Op::ne;
        throw Error(Errc::config_error, "unknown operator: " + s);
    }

    static sql::Value parse_value(const std::string& s) {
        if (s.size() >= 2 && s.front() == '\'' && s.back() == '\'') {
            return s.substr(1, s.size() - 2);
        }
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && p == s.data() + s.size()) return v;
        return s;
    }

    Catalog& cat_;
    crypto::Mt19937_64& rng_;
};

/// Benchmark / gateway scenario: one tenant, a 25-role hierarchy over an
/// employee table with four sensitive columns, eight groups and eight bench
/// users holding 1..8 pairwise-incomparable leaf roles.
inline std::string s4_fixture(int key_bits = 256, int rows = 40) {
    std::ostringstream f;
    f << "tenant s4 scenario-four " << key_bits << "\n";
    f << "table s4 employees emp_id name dept phone salary ssn bonus review\n";
    for (const char* c : {"salary", "ssn", "bonus", "review"}) {
        f << "sensitive s4 employees " << c << "\n";
    }

    // Hierarchy: admin root (created with the tenant), four directors, two
    // managers each, twelve leaves.
    f << "role s4 admin dir_eng\n"
         "role s4 admin dir_ops\n"
         "role s4 admin dir_hr\n"
         "role s4 admin dir_fin\n"
         "role s4 dir_eng eng_mgr_a\n"
         "role s4 dir_eng eng_mgr_b\n"
         "role s4 dir_ops ops_mgr_a\n"
         "role s4 dir_ops ops_mgr_b\n"
         "role s4 dir_hr hr_mgr_a\n"
         "role s4 dir_hr hr_mgr_b\n"
         "role s4 dir_fin fin_mgr_a\n"
         "role s4 dir_fin fin_mgr_b\n"
         "role s4 eng_mgr_a eng_a\n"
         "role s4 eng_mgr_a eng_b\n"
         "role s4 eng_mgr_b eng_c\n"
         "role s4 ops_mgr_a op_a\n"
         "role s4 ops_mgr_a op_b\n"
         "role s4 ops_mgr_b op_c\n"
         "role s4 hr_mgr_a hr_a\n"
         "role s4 hr_mgr_a hr_b\n"
         "role s4 hr_mgr_b hr_c\n"
         "role s4 fin_mgr_a auditor_a\n"
         "role s4 fin_mgr_b clerk_a\n"
         "role s4 fin_mgr_b clerk_b\n";

    f << "perm s4 admin select employees sensitive emp_id name dept phone salary ssn bonus review\n"
         "perm s4 admin insert employees sensitive emp_id name dept phone salary ssn bonus review\n"
         "perm s4 admin update employees sensitive emp_id name dept phone salary ssn bonus review\n"
         "perm s4 admin delete employees sensitive emp_id name dept phone salary ssn bonus review\n"
         "perm s4 dir_eng select employees plain emp_id name dept phone\n"
         "perm s4 dir_ops update employees plain dept\n"
         "perm s4 dir_hr select employees sensitive salary bonus\n"
         "perm s4 dir_fin select employees sensitive salary ssn bonus review\n"
         "perm s4 eng_mgr_a select employees plain emp_id name dept\n"
         "perm s4 eng_mgr_b update employees plain phone\n"
         "perm s4 ops_mgr_a select employees plain emp_id dept\n"
         "perm s4 ops_mgr_b delete employees plain emp_id\n"
         "perm s4 hr_mgr_a select employees sensitive salary\n"
         "perm s4 hr_mgr_b update employees sensitive bonus\n"
         "perm s4 fin_mgr_a select employees sensitive ssn\n"
         "perm s4 fin_mgr_b select employees sensitive review\n"
         "perm s4 eng_a select employees plain emp_id name\n"
         "perm s4 eng_b select employees plain dept phone\n"
         "perm s4 eng_c update employees plain dept\n"
         "perm s4 eng_c select employees plain emp_id dept\n"
         "perm s4 op_a select employees plain emp_id name\n"
         "perm s4 op_b select employees plain name dept\n"
         "perm s4 op_c select employees plain emp_id phone\n"
         "perm s4 hr_a select employees sensitive salary bonus\n"
         "perm s4 hr_a select employees plain emp_id name\n"
         "perm s4 hr_b select employees sensitive bonus\n"
         "perm s4 hr_b select employees plain emp_id\n"
         "perm s4 hr_c update employees sensitive salary\n"
         "perm s4 hr_c select employees plain emp_id\n"
         "perm s4 auditor_a select employees sensitive salary ssn bonus review\n"
         "perm s4 auditor_a select employees plain emp_id name dept phone\n"
         "perm s4 clerk_a select employees plain emp_id\n"
         "perm s4 clerk_b select employees plain emp_id name\n";

    f << "user s4 root_admin s4-admin-pw\n"
         "assign s4 root_admin admin\n";
    // benchN holds the first N of this pairwise-incomparable leaf list.
    const char* bench_roles[] = {"auditor_a", "eng_a", "eng_c", "op_a",
                                 "op_c",      "hr_a",  "hr_c",  "clerk_b"};
    for (int i = 1; i <= 8; ++i) {
        f << "user s4 bench" << i << " pw-bench" << i << "\n";
        for (int k = 0; k < i; ++k) {
            f << "assign s4 bench" << i << " " << bench_roles[k] << "\n";
        }
    }

    const char* groups[] = {"g_eng", "g_ops", "g_hr", "g_fin", "g_audit", "g_clerk",
                            "g_dir", "g_empty"};
    for (const char* g : groups) f << "group s4 " << g << " gk-" << g << "\n";
    f << "grouprole s4 g_eng eng_a\n"
         "grouprole s4 g_eng eng_b\n"
         "grouprole s4 g_ops op_a\n"
         "grouprole s4 g_ops op_b\n"
         "grouprole s4 g_hr hr_a\n"
         "grouprole s4 g_hr hr_b\n"
         "grouprole s4 g_fin auditor_a\n"
         "grouprole s4 g_audit auditor_a\n"
         "grouprole s4 g_audit clerk_a\n"
         "grouprole s4 g_clerk clerk_a\n"
         "grouprole s4 g_clerk clerk_b\n"
         "grouprole s4 g_dir dir_eng\n"
         "grouprole s4 g_dir dir_ops\n"
         "groupadd s4 g_eng bench2\n"
         "groupadd s4 g_hr bench6\n"
         "groupadd s4 g_audit root_admin\n"
         // bench8 carries the experiment maximum: 8 roles, 3 groups.
         "groupadd s4 g_eng bench8\n"
         "groupadd s4 g_hr bench8\n"
         "groupadd s4 g_fin bench8\n"
         "policy s4 auditor_a maxconc 1000000\n"
         "policy s4 clerk_a window 0 24\n";

    const char* depts[] = {"eng", "ops", "hr", "fin"};
    const char* reviews[] = {"ok", "strong", "coach", "n/a"};
    for (int i = 1; i <= rows; ++i) {
        f << "sql s4 INSERT INTO employees (emp_id, name, dept, phone, salary, ssn, "
             "bonus, review) VALUES ("
          << i << ", 'emp" << i << "', '" << depts[i % 4] << "', '555-01" << 10 + i
          << "', " << 50000 + i * 137 << ", 'ssn-" << 1000 + i << "', " << i * 13
          << ", '" << reviews[i % 4] << "')\n";
    }
    return f.str();
}

} // namespace rolegate::catalog
