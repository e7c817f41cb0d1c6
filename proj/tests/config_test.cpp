#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "rolegate/config.hpp"

using namespace rolegate;

TEST_CASE("config files parse with defaults and comments", "[config]") {
    Config cfg = parse_config_text("# gateway settings\n"
                                   "listen_host = 0.0.0.0\n"
                                   "listen_port = 9000\n"
                                   "\n"
                                   "data_dir = /tmp/rg\n"
                                   "key_bits = 256\n"
                                   "session_ttl_seconds = 30\n");
    CHECK(cfg.listen_host == "0.0.0.0");
    CHECK(cfg.listen_port == 9000);
    CHECK(cfg.data_dir == "/tmp/rg");
    CHECK(cfg.key_bits == 256);
    CHECK(cfg.session_ttl_seconds == 30);

    Config defaults = parse_config_text("");
    CHECK(defaults.listen_host == "127.0.0.1");
    CHECK(defaults.listen_port == 7433);
    CHECK(defaults.data_dir.empty());
}

TEST_CASE("config rejects unknown keys and bad values", "[config]") {
    CHECK_THROWS_AS(parse_config_text("mystery = 1\n"), Error);
    CHECK_THROWS_AS(parse_config_text("listen_port = 70000\n"), Error);
    CHECK_THROWS_AS(parse_config_text("listen_port = abc\n"), Error);
    CHECK_THROWS_AS(parse_config_text("no equals sign\n"), Error);
    CHECK_THROWS_AS(load_config_file("/nonexistent/rolegate.conf"), Error);
}

TEST_CASE("environment variables override the file", "[config]") {
    Config cfg = parse_config_text("listen_port = 9000\ndata_dir = /tmp/a\n");

    setenv("ROLEGATE_LISTEN", "10.0.0.5:7500", 1);
    setenv("ROLEGATE_DATA_DIR", "/tmp/b", 1);
    apply_env_overrides(cfg);
    unsetenv("ROLEGATE_LISTEN");
    unsetenv("ROLEGATE_DATA_DIR");

    CHECK(cfg.listen_host == "10.0.0.5");
    CHECK(cfg.listen_port == 7500);
    CHECK(cfg.data_dir == "/tmp/b");

    setenv("ROLEGATE_LISTEN", "no-port-here", 1);
    CHECK_THROWS_AS(apply_env_overrides(cfg), Error);
    unsetenv("ROLEGATE_LISTEN");
}
