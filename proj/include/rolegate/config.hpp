#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "rolegate/errors.hpp"

namespace rolegate {

/// Service settings, read from a line-oriented `key = value` file ('#'
/// comments, blank lines ignored). ROLEGATE_LISTEN (host:port) and
/// ROLEGATE_DATA_DIR override the file.
struct Config {
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 7433;
    std::string data_dir;        // empty = in-memory catalog
    unsigned key_bits = 512;     // Paillier modulus size for new tenants
    unsigned session_ttl_seconds = 60;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline unsigned parse_uint(std::string_view key, std::string_view value, unsigned max) {
    unsigned out = 0;
    try {
        std::size_t used = 0;
        std::string v(value);
        unsigned long parsed = std::stoul(v, &used);
        if (used != v.size() || parsed > max) throw std::invalid_argument("range");
        out = static_cast<unsigned>(parsed);
    } catch (const std::exception&) {
        throw Error(Errc::config_error,
                    "bad value for " + std::string(key) + ": " + std::string(value));
    }
    return out;
}

} // namespace detail

inline Config parse_config(std::istream& in) {
    Config cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        std::size_t eq = sv.find('=');
        if (eq == std::string_view::npos) {
            throw Error(Errc::config_error,
                        "line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key(detail::trim(sv.substr(0, eq)));
        std::string value(detail::trim(sv.substr(eq + 1)));
        if (key == "listen_host") {
            cfg.listen_host = value;
        } else if (key == "listen_port") {
            cfg.listen_port = static_cast<std::uint16_t>(detail::parse_uint(key, value, 65535));
        } else if (key == "data_dir") {
            cfg.data_dir = value;
        } else if (key == "key_bits") {
            cfg.key_bits = detail::parse_uint(key, value, 4096);
        } else if (key == "session_ttl_seconds") {
            cfg.session_ttl_seconds = detail::parse_uint(key, value, 86400);
        } else {
            throw Error(Errc::config_error,
                        "line " + std::to_string(lineno) + ": unknown key " + key);
        }
    }
    return cfg;
}

inline Config parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config_error, "cannot open " + path);
    return parse_config(in);
}

/// Environment overrides, applied after file parsing.
inline void apply_env_overrides(Config& cfg) {
    if (const char* listen = std::getenv("ROLEGATE_LISTEN")) {
        std::string_view sv(listen);
        std::size_t colon = sv.rfind(':');
        if (colon == std::string_view::npos) {
            throw Error(Errc::config_error, "ROLEGATE_LISTEN must be host:port");
        }
        cfg.listen_host = std::string(sv.substr(0, colon));
        cfg.listen_port = static_cast<std::uint16_t>(
            detail::parse_uint("ROLEGATE_LISTEN", sv.substr(colon + 1), 65535));
    }
    if (const char* dir = std::getenv("ROLEGATE_DATA_DIR")) {
        cfg.data_dir = dir;
    }
}

} // namespace rolegate
