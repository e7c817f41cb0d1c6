// Drives the installed binary as real subprocesses: exit codes, output
// formats, persistence across separate invocations, and the serve lifecycle.

#include <catch2/catch_amalgamated.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "rolegate/gateway/client.hpp"

namespace fs = std::filesystem;
using namespace rolegate;

namespace {

struct CliResult {
    int code = -1;
    std::string output; // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(ROLEGATE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[512];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "rolegate-cli-XXXXXX").string();
        REQUIRE(mkdtemp(tmpl.data()) != nullptr);
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        out.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        out.push_back(line.substr(pos, tab - pos));
        if (tab == std::string::npos) break;
        pos = tab + 1;
    }
    return out;
}

/// Forked `serve` process; kills it on scope exit unless released.
struct ServeGuard {
    pid_t pid = -1;
    int out_fd = -1;
    std::uint16_t port = 0;

    ~ServeGuard() {
        if (out_fd >= 0) close(out_fd);
        if (pid > 0) {
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
        }
    }
};

void spawn_serve(ServeGuard& g, const std::string& data_dir) {
    int fds[2];
    REQUIRE(pipe(fds) == 0);
    pid_t pid = fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        dup2(fds[1], STDOUT_FILENO);
        close(fds[0]);
        close(fds[1]);
        execl(ROLEGATE_CLI_PATH, "rolegate", "--data", data_dir.c_str(), "serve",
              "--listen", "127.0.0.1:0", static_cast<char*>(nullptr));
        _exit(127);
    }
    g.pid = pid;
    g.out_fd = fds[0];
    close(fds[1]);

    std::string banner;
    pollfd pfd{g.out_fd, POLLIN, 0};
    while (true) {
        REQUIRE(poll(&pfd, 1, 15000) == 1); // server must announce within 15s
        char ch = 0;
        REQUIRE(read(g.out_fd, &ch, 1) == 1);
        if (ch == '\n') break;
        banner += ch;
    }
    REQUIRE(banner.rfind("listening on 127.0.0.1:", 0) == 0);
    g.port = static_cast<std::uint16_t>(std::stoul(banner.substr(banner.rfind(':') + 1)));
    REQUIRE(g.port != 0);
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("usage errors exit 2, help exits 0", "[cli]") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("tenant").code == 2); // subcommand group needs a verb
    CHECK(run_cli("bench run").code == 2); // --port is required

    CliResult help = run_cli("--help");
    CHECK(help.code == 0);
    CHECK(contains(help.output, "Usage"));
    CHECK(contains(help.output, "serve"));
    CHECK(contains(help.output, "bench"));
}

TEST_CASE("module errors exit 1 with the error name", "[cli]") {
    unsetenv("ROLEGATE_DATA_DIR");

    CliResult no_dir = run_cli("tenant list");
    CHECK(no_dir.code == 1);
    CHECK(contains(no_dir.output, "ConfigError"));

    TempDir d;
    CliResult ghost = run_cli("--data " + d.path.string() + " role list acme");
    CHECK(ghost.code == 1);
    CHECK(contains(ghost.output, "TenantUnknown"));

    CliResult bad_fixture =
        run_cli("--data " + d.path.string() + " seed --fixture /no/such/file.fx");
    CHECK(bad_fixture.code == 1);
    CHECK(contains(bad_fixture.output, "ConfigError"));
}

TEST_CASE("admin flow persists across separate invocations", "[cli]") {
    TempDir d;
    const std::string base = "--data " + d.path.string() + " ";

    CliResult t = run_cli(base + "tenant add acme 'Acme Corp' --key-bits 64");
    REQUIRE(t.code == 0);
    CHECK(t.output.rfind("tenant acme root_role ", 0) == 0);

    REQUIRE(run_cli(base + "role add acme Manager").code == 0);
    REQUIRE(run_cli(base + "role add acme Clerk --parent Manager").code == 0);

    CliResult dup = run_cli(base + "role add acme Clerk --parent Manager");
    CHECK(dup.code == 1);
    CHECK(contains(dup.output, "DuplicateRoleName"));

    CliResult list = run_cli(base + "role list acme");
    REQUIRE(list.code == 0);
    std::vector<std::string> rows = lines_of(list.output);
    REQUIRE(rows.size() == 4); // header + three roles
    CHECK(rows[0] == "id\tlft\trgt\tsensitive\tname");
    int min_lft = 1 << 20, max_rgt = 0;
    bool saw_manager = false, saw_clerk = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::vector<std::string> f = fields_of(rows[i]);
        REQUIRE(f.size() == 5);
        min_lft = std::min(min_lft, std::stoi(f[1]));
        max_rgt = std::max(max_rgt, std::stoi(f[2]));
        if (f[4] == "Manager") saw_manager = true;
        if (f[4] == "Clerk") saw_clerk = true;
    }
    CHECK(min_lft == 1);
    CHECK(max_rgt == 6); // three roles in one chain: root spans 1..6
    CHECK(saw_manager);
    CHECK(saw_clerk);

    REQUIRE(run_cli(base + "table add acme employees emp_id name salary").code == 0);
    REQUIRE(run_cli(base + "sensitive mark acme employees salary").code == 0);

    CliResult ins = run_cli(
        base +
        "sql acme \"INSERT INTO employees (emp_id, name, salary) VALUES (1, 'ada', 777)\"");
    REQUIRE(ins.code == 0);
    CHECK(contains(ins.output, "affected 1"));

    CliResult sel =
        run_cli(base + "sql acme \"SELECT name, salary FROM employees WHERE emp_id = 1\"");
    REQUIRE(sel.code == 0);
    CHECK(contains(sel.output, "ada"));
    CHECK(contains(sel.output, "pc1:")); // sensitive cell rendered as ciphertext

    CliResult u = run_cli(base + "user add acme bob secretpw");
    CHECK(u.code == 0);
    CHECK(u.output.rfind("user ", 0) == 0);
    CHECK(contains(run_cli(base + "user list acme").output, "bob"));

    CHECK(run_cli(base + "perm grant acme Clerk SELECT employees name emp_id").code == 0);
    CliResult bad_action =
        run_cli(base + "perm grant acme Clerk FROBNICATE employees name");
    CHECK(bad_action.code == 1);
    CHECK(contains(bad_action.output, "InvalidArgument"));
}

TEST_CASE("seed reports fixture totals and --data falls through", "[cli]") {
    TempDir d;
    CliResult seeded =
        run_cli("--data " + d.path.string() + " seed --fixture s4 --key-bits 64 --rows 6");
    REQUIRE(seeded.code == 0);
    CHECK(contains(seeded.output, "seeded: 25 roles, 8 groups, 9 users"));

    CHECK(contains(run_cli("--data " + d.path.string() + " tenant list").output, "s4"));

    // --data after the subcommand must reach the global option.
    CliResult trailing = run_cli("role list s4 --data " + d.path.string());
    REQUIRE(trailing.code == 0);
    CHECK(contains(trailing.output, "auditor_a"));
}

TEST_CASE("serve answers queries and shuts down cleanly on SIGTERM", "[cli]") {
    TempDir d;
    REQUIRE(run_cli("--data " + d.path.string() +
                    " seed --fixture s4 --key-bits 64 --rows 6")
                .code == 0);

    ServeGuard guard;
    spawn_serve(guard, d.path.string());

    {
        gateway::Client client("127.0.0.1", guard.port);
        client.login("s4", "bench1", "pw-bench1");
        gateway::Client::SessionKey sk = client.key_request();
        gateway::QueryOutcome out =
            client.query(sk, "SELECT name FROM employees WHERE emp_id = 1");
        REQUIRE(out.status == gateway::Status::rows);
        gateway::Client::Result rs = gateway::Client::open_payload(sk, out);
        REQUIRE(rs.rows.size() == 1);
        CHECK(rs.rows[0][0] == "emp1");
    }

    REQUIRE(kill(guard.pid, SIGTERM) == 0);
    int status = 0;
    REQUIRE(waitpid(guard.pid, &status, 0) == guard.pid);
    guard.pid = -1; // reaped; guard must not SIGKILL
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
}
