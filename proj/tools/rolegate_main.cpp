// rolegate: admin CLI, gateway server and benchmark driver.
//
// Exit codes: 0 success, 1 module error (printed to stderr), 2 usage error.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>
#include <optional>
#include <random>
#include <thread>

#include "rolegate/bench/harness.hpp"
#include "rolegate/catalog/fixture.hpp"
#include "rolegate/config.hpp"
#include "rolegate/crypto/paillier.hpp"
#include "rolegate/gateway/server.hpp"
#include "rolegate/rbac/engine.hpp"

using namespace rolegate;

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

std::uint64_t entropy_seed() {
    std::random_device rd;
    return static_cast<std::uint64_t>(rd()) << 32 | rd();
}

catalog::Catalog& open_catalog(std::optional<catalog::Catalog>& slot,
                               const std::string& data_dir) {
    if (data_dir.empty()) {
        throw Error(Errc::config_error,
                    "no catalog directory; pass --data or set ROLEGATE_DATA_DIR");
    }
    slot.emplace(data_dir);
    return *slot;
}

crypto::paillier::KeyPair make_keypair(unsigned bits) {
    crypto::Mt19937_64 rng{entropy_seed()};
    return crypto::paillier::keygen(bits, rng);
}

void print_roles(catalog::Catalog& cat, const std::string& tenant) {
    cat.with_tree(tenant, [&](const hierarchy::RoleTree& tree) {
        std::cout << "id\tlft\trgt\tsensitive\tname\n";
        for (const hierarchy::RoleNode* n : tree.all()) {
            std::cout << n->role_id << '\t' << n->lft << '\t' << n->rgt << '\t'
                      << (n->sensitive_allowed ? "yes" : "no") << '\t' << n->name
                      << '\n';
        }
        return 0;
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rolegate: role-gated gateway for encrypted tenant data"};
    app.require_subcommand(1);

    std::string data_dir;
    if (const char* env = std::getenv("ROLEGATE_DATA_DIR")) data_dir = env;
    app.add_option("--data", data_dir, "catalog directory (env ROLEGATE_DATA_DIR)");

    std::optional<catalog::Catalog> cat;

    // ---- tenant ------------------------------------------------------------
    auto* tenant = app.add_subcommand("tenant", "tenant management");
    tenant->require_subcommand(1);
    {
        auto* add = tenant->add_subcommand("add", "create a tenant with a fresh key pair");
        static std::string id, name;
        static unsigned bits = 512;
        add->add_option("id", id)->required();
        add->add_option("name", name)->required();
        add->add_option("--key-bits", bits, "Paillier modulus size")->default_val(512);
        add->callback([&] {
            auto& c = open_catalog(cat, data_dir);
            catalog::TenantRecord t = c.create_tenant(id, name, make_keypair(bits));
            std::cout << "tenant " << t.tenant_id << " root_role " << t.root_role_id
                      << " key " << t.paillier_key_id << "\n";
        });

        auto* list = tenant->add_subcommand("list", "list tenants");
        list->callback([&] {
            auto& c = open_catalog(cat, data_dir);
            for (const auto& t : c.list_tenants()) {
                std::cout << t.tenant_id << '\t' << t.name << '\n';
            }
        });
    }

    // ---- user ----------------------------------------------------------------
    auto* user = app.add_subcommand("user", "user management");
    user->require_subcommand(1);
    {
        static std::string t, u, pw;
        auto* add = user->add_subcommand("add", "register a user");
        add->add_option("tenant", t)->required();
        add->add_option("username", u)->required();
        add->add_option("password", pw)->required();
        add->callback([&] {
            auto& c = open_catalog(cat, data_dir);
            catalog::UserRecord r = c.register_user(t, u, pw);
            std::cout << "user " << r.user_id << "\n";
        });

        auto* rm = user->add_subcommand("rm", "delete a user");
        rm->add_option("tenant", t)->required();
        rm->add_option("username", u)->required();
        rm->callback([&] { open_catalog(cat, data_dir).delete_user(t, u); });

        auto* list = user->add_subcommand("list", "list a tenant's users");
        list->add_option("tenant", t)->required();
        list->callback([&] {
            auto& c = open_catalog(cat, data_dir);
            for (const auto& r : c.list_users(t)) {
                std::cout << r.user_id << '\t' << r.username << '\n';
            }
        });

        auto* assign = user->add_subcommand("assign", "assign a role to a user");
        static std::string role;
        assign->add_option("tenant", t)->required();
        assign->add_option("username", u)->required();
        assign->add_option("role", role)->required();
        assign->callback(
            [&] { open_catalog(cat, data_dir).assign_role(t, u, role); });
    }

    // ---- group ---------------------------------------------------------------
    auto* group = app.add_subcommand("group", "group management");
    group->require_subcommand(1);
    {
        static std::string t, g, key, u, role;
        auto* add = group->add_subcommand("add", "create a group with its key");
        add->add_option("tenant", t)->required();
        add->add_option("group", g)->required();
        add->add_option("key", key)->required();
        add->callback([&] { open_catalog(cat, data_dir).create_group(t, g, key); });

        auto* member = group->add_subcommand("member", "add a user to a group");
        member->add_option("tenant", t)->required();
        member->add_option("group", g)->required();
        member->add_option("username", u)->required();
        member->callback(
            [&] { open_catalog(cat, data_dir).add_group_member(t, g, u); });

        auto* grole = group->add_subcommand("role", "attach a role to a group");
        grole->add_option("tenant", t)->required();
        grole->add_option("group", g)->required();
        grole->add_option("rolename", role)->required();
        grole->callback(
            [&] { open_catalog(cat, data_dir).add_group_role(t, g, role); });
    }

    // ---- role ----------------------------------------------------------------
    auto* role = app.add_subcommand("role", "role hierarchy management");
    role->require_subcommand(1);
    {
        static std::string t, name, parent;
        auto* add = role->add_subcommand("add", "insert a role under a parent");
        add->add_option("tenant", t)->required();
        add->add_option("name", name)->required();
        add->add_option("--parent", parent, "parent role (default: tenant root)");
        add->callback([&] {
            auto& c = open_catalog(cat, data_dir);
            std::string p = parent;
            if (p.empty()) {
                std::uint64_t root_id = c.tenant(t).root_role_id;
                p = c.with_tree(t, [&](const hierarchy::RoleTree& tr) {
                    return tr.node(root_id).name;
                });
            }
            hierarchy::RoleNode n = c.create_role(t, p, name, {});
            std::cout << "role " << n.role_id << " lft " << n.lft << " rgt " << n.rgt
                      << "\n";
        });

        auto* rm = role->add_subcommand("rm", "delete a role");
        rm->add_option("tenant", t)->required();
        rm->add_option("name", name)->required();
        rm->callback([&] { open_catalog(cat, data_dir).delete_role(t, name); });

        auto* list = role->add_subcommand("list", "show the nested-set layout");
        list->add_option("tenant", t)->required();
        list->callback([&] { print_roles(open_catalog(cat, data_dir), t); });
    }

    // ---- perm ----------------------------------------------------------------
    auto* perm = app.add_subcommand("perm", "permission grants");
    perm->require_subcommand(1);
    {
        static std::string t, role_name, action, table;
        static std::vector<std::string> columns;
        static bool sensitive = false;
        auto* grant = perm->add_subcommand("grant", "grant a permission to a role");
        grant->add_option("tenant", t)->required();
        grant->add_option("role", role_name)->required();
        grant->add_option("action", action, "SELECT/INSERT/UPDATE/DELETE")->required();
        grant->add_option("table", table)->required();
        grant->add_option("columns", columns)->required()->expected(-1);
        grant->add_flag("--sensitive", sensitive, "grant covers sensitive columns");
        grant->callback([&] {
            Permission p;
            p.action = parse_action(action);
            p.table = table;
            p.columns.insert(columns.begin(), columns.end());
            p.sensitive = sensitive;
            open_catalog(cat, data_dir).grant_permission(t, role_name, p);
        });
    }

    // ---- table / sensitive -----------------------------------------------------
    auto* table = app.add_subcommand("table", "table management");
    table->require_subcommand(1);
    {
        static std::string t, name;
        static std::vector<std::string> columns;
        auto* add = table->add_subcommand("add", "declare a table's columns");
        add->add_option("tenant", t)->required();
        add->add_option("name", name)->required();
        add->add_option("columns", columns)->required()->expected(-1);
        add->callback([&] { open_catalog(cat, data_dir).create_table(t, name, columns); });
    }

    auto* sensitive_cmd = app.add_subcommand("sensitive", "sensitive-column registry");
    sensitive_cmd->require_subcommand(1);
    {
        static std::string t, table_name, column;
        auto* mark = sensitive_cmd->add_subcommand("mark", "mark a column sensitive");
        mark->add_option("tenant", t)->required();
        mark->add_option("table", table_name)->required();
        mark->add_option("column", column)->required();
        mark->callback(
            [&] { open_catalog(cat, data_dir).mark_sensitive_column(t, table_name, column); });
    }

    // ---- sql (admin-side execution) ---------------------------------------------
    auto* sql_cmd = app.add_subcommand("sql", "run a statement as the administrator");
    {
        static std::string t;
        static std::vector<std::string> words;
        sql_cmd->add_option("tenant", t)->required();
        sql_cmd->add_option("statement", words)->required()->expected(-1);
        sql_cmd->callback([&] {
            auto& c = open_catalog(cat, data_dir);
            std::string text;
            for (const auto& w : words) {
                if (!text.empty()) text += ' ';
                text += w;
            }
            crypto::Mt19937_64 rng{entropy_seed()};
            catalog::FixtureLoader fx(c, rng);
            catalog::ResultSet rs = fx.run_sql(t, text);
            for (std::size_t i = 0; i < rs.columns.size(); ++i) {
                std::cout << (i ? "\t" : "") << rs.columns[i];
            }
            if (!rs.columns.empty()) std::cout << "\n";
            for (const auto& row : rs.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (i) std::cout << '\t';
                    if (std::holds_alternative<std::int64_t>(row[i])) {
                        std::cout << std::get<std::int64_t>(row[i]);
                    } else if (std::holds_alternative<std::string>(row[i])) {
                        std::cout << std::get<std::string>(row[i]);
                    } else {
                        std::cout << sql::make_cipher_literal(std::get<Bytes>(row[i]));
                    }
                }
                std::cout << "\n";
            }
            if (rs.columns.empty()) std::cout << "affected " << rs.affected << "\n";
        });
    }

    // ---- seed ------------------------------------------------------------------
    auto* seed = app.add_subcommand("seed", "load a fixture into the catalog");
    {
        static std::string fixture = "s4";
        static unsigned bits = 256;
        static int rows = 40;
        seed->add_option("--fixture", fixture, "builtin name (s4) or a fixture file");
        seed->add_option("--key-bits", bits)->default_val(256);
        seed->add_option("--rows", rows)->default_val(40);
        seed->callback([&] {
            auto& c = open_catalog(cat, data_dir);
            std::string text;
            if (fixture == "s4") {
                text = catalog::s4_fixture(bits, rows);
            } else {
                std::ifstream in(fixture);
                if (!in) throw Error(Errc::config_error, "cannot open " + fixture);
                text.assign(std::istreambuf_iterator<char>(in), {});
            }
            crypto::Mt19937_64 rng{entropy_seed()};
            catalog::FixtureLoader fx(c, rng);
            fx.run(text);
            std::size_t role_count = 0, group_count = 0, user_count = 0;
            for (const auto& t : c.list_tenants()) {
                role_count += c.with_tree(t.tenant_id,
                                          [](const hierarchy::RoleTree& tr) {
                                              return tr.all().size();
                                          });
                group_count += c.list_groups(t.tenant_id).size();
                user_count += c.list_users(t.tenant_id).size();
            }
            std::cout << "seeded: " << role_count << " roles, " << group_count
                      << " groups, " << user_count << " users\n";
        });
    }

    // ---- serve -------------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "run the gateway");
    {
        static std::string config_path, listen;
        serve->add_option("--config", config_path, "line-oriented config file");
        serve->add_option("--listen", listen, "host:port (overrides config)");
        serve->callback([&] {
            Config cfg = config_path.empty() ? Config{} : load_config_file(config_path);
            apply_env_overrides(cfg);
            if (!listen.empty()) {
                std::size_t colon = listen.rfind(':');
                if (colon == std::string::npos) {
                    throw Error(Errc::config_error, "--listen must be host:port");
                }
                cfg.listen_host = listen.substr(0, colon);
                cfg.listen_port = static_cast<std::uint16_t>(
                    std::stoul(listen.substr(colon + 1)));
            }
            if (!data_dir.empty()) cfg.data_dir = data_dir;

            std::optional<catalog::Catalog> store;
            if (cfg.data_dir.empty()) {
                store.emplace();
            } else {
                store.emplace(cfg.data_dir);
            }
            rbac::AccessEngine engine(*store);
            store->set_role_in_use_hook([&engine](const std::string& t, std::uint64_t id) {
                return engine.role_live(t, id);
            });
            store->set_user_in_use_hook([&engine](const std::string& t, std::uint64_t id) {
                return engine.user_live(t, id);
            });
            session::SessionManager sessions(*store);
            sessions.set_ttl(std::chrono::seconds(cfg.session_ttl_seconds));
            gateway::GatewayService service(*store, engine, sessions);
            gateway::Server server(*store, sessions, service);
            server.start(cfg.listen_host, cfg.listen_port);
            std::cout << "listening on " << cfg.listen_host << ":" << server.port()
                      << std::endl;

            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            while (!g_stop) {
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
                sessions.expire_sweep();
            }
            server.stop();
            if (!cfg.data_dir.empty()) store->save();
        });
    }

    // ---- bench ----------------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "benchmark a running gateway");
    bench_cmd->require_subcommand(1);
    {
        static bench::Options opt;
        static std::string host = "127.0.0.1";
        static unsigned port = 7433;

        auto add_common = [&](CLI::App* cmd) {
            cmd->add_option("--host", host);
            cmd->add_option("--port", port)->required();
            cmd->add_option("--tenant", opt.tenant);
            cmd->add_option("--rows", opt.rows, "seeded fixture row count");
            cmd->add_option("--seed", opt.seed);
            cmd->add_option("--clients", opt.clients);
        };

        auto* run = bench_cmd->add_subcommand("run", "timed query run, CSV to stdout");
        add_common(run);
        run->add_option("--queries", opt.queries);
        run->add_option("--mix", opt.mix)
            ->check(CLI::IsMember({"sensitive", "nonsensitive", "mixed"}));
        run->add_option("--user", opt.user);
        run->add_option("--password", opt.password);
        run->callback([&] {
            opt.host = host;
            opt.port = static_cast<std::uint16_t>(port);
            bench::Report r = bench::run(opt);
            bench::write_csv(std::cout, r);
            if (r.failures > 0) {
                throw Error(Errc::execution_error,
                            std::to_string(r.failures) + " queries failed");
            }
        });

        static int max_size = 8;
        static int per_size = 1000;
        auto* sweep = bench_cmd->add_subcommand(
            "sweep", "mean activation time for role-set sizes 1..N");
        add_common(sweep);
        sweep->add_option("--max-size", max_size);
        sweep->add_option("--queries", per_size, "queries per size");
        sweep->callback([&] {
            opt.host = host;
            opt.port = static_cast<std::uint16_t>(port);
            std::cout << "role_set_size,mean_activate_us\n";
            for (auto [size, mean] : bench::role_sweep(opt, max_size, per_size)) {
                std::cout << size << ',' << std::fixed << std::setprecision(1) << mean
                          << '\n';
            }
        });
    }

    // Let `--data` appear anywhere on the line, subcommand or not.
    std::function<void(CLI::App*)> allow_fallthrough = [&](CLI::App* cmd) {
        cmd->fallthrough();
        for (CLI::App* sub : cmd->get_subcommands({})) allow_fallthrough(sub);
    };
    for (CLI::App* sub : app.get_subcommands({})) allow_fallthrough(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
