#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rolegate/bytes.hpp"
#include "rolegate/errors.hpp"

namespace rolegate::gateway {

// Wire frame: [u32 length, big-endian][u8 tag][body][0x0A]. The length
// counts the tag byte plus the body; the trailing newline sits outside it
// and doubles as a resync sentinel — a frame without it is malformed.
enum class Tag : std::uint8_t {
    login = 1,
    keyreq = 2,
    query = 3,
    result = 4,
    error = 5,
};

struct Frame {
    Tag tag = Tag::error;
    Bytes body;
};

inline constexpr std::size_t kMaxFrameBody = 1 << 24; // 16 MiB sanity cap

inline Bytes encode_frame(const Frame& f) {
    std::uint32_t len = static_cast<std::uint32_t>(1 + f.body.size());
    Bytes out;
    out.reserve(4 + len + 1);
    out.push_back(static_cast<std::uint8_t>(len >> 24));
    out.push_back(static_cast<std::uint8_t>(len >> 16));
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.push_back(static_cast<std::uint8_t>(len));
    out.push_back(static_cast<std::uint8_t>(f.tag));
    out.insert(out.end(), f.body.begin(), f.body.end());
    out.push_back('\n');
    return out;
}

/// Incremental decode: nullopt means "need more bytes"; a malformed length,
/// tag or terminator throws. On success returns the frame and the number of
/// bytes consumed from the front of `buf`.
inline std::optional<std::pair<Frame, std::size_t>> decode_frame(const Bytes& buf) {
    if (buf.size() < 4) return std::nullopt;
    std::uint32_t len = (static_cast<std::uint32_t>(buf[0]) << 24) |
                        (static_cast<std::uint32_t>(buf[1]) << 16) |
                        (static_cast<std::uint32_t>(buf[2]) << 8) |
                        static_cast<std::uint32_t>(buf[3]);
    if (len < 1 || len > kMaxFrameBody + 1) {
        throw Error(Errc::malformed_frame, "frame length " + std::to_string(len));
    }
    if (buf.size() < 4 + static_cast<std::size_t>(len) + 1) return std::nullopt;
    std::uint8_t tag = buf[4];
    if (tag < 1 || tag > 5) {
        throw Error(Errc::malformed_frame, "unknown tag " + std::to_string(tag));
    }
    if (buf[4 + len] != '\n') {
        throw Error(Errc::malformed_frame, "missing frame terminator");
    }
    Frame f;
    f.tag = static_cast<Tag>(tag);
    f.body.assign(buf.begin() + 5, buf.begin() + 4 + len);
    return std::make_pair(std::move(f), 4 + static_cast<std::size_t>(len) + 1);
}

// ---- frame bodies ----------------------------------------------------------
// Bodies are UTF-8 `key=value` lines. Values must not contain newlines;
// anything binary travels hex-encoded.

using Fields = std::map<std::string, std::string>;

inline Bytes encode_fields(const Fields& fields) {
    std::string out;
    for (const auto& [k, v] : fields) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return Bytes(out.begin(), out.end());
}

inline Fields parse_fields(const Bytes& body) {
    Fields out;
    std::string text(body.begin(), body.end());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(Errc::protocol_error, "field without '='");
        }
        out.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
    return out;
}

inline const std::string& require_field(const Fields& f, const std::string& key) {
    auto it = f.find(key);
    if (it == f.end()) throw Error(Errc::protocol_error, "missing field " + key);
    return it->second;
}

// ---- query envelope and outcome --------------------------------------------

/// The client's single input string, split into fields: who is asking, the
/// session whose key sealed the query, and the optional group key / request
/// trailer. `encrypted_query` is the AES-GCM-sealed SQL text.
struct QueryEnvelope {
    std::string session_id;
    std::uint64_t user_id = 0;
    Bytes encrypted_query;
    std::optional<std::string> group_key;
    std::optional<std::string> optional_requests; // e.g. "sensitive=1"
};

inline Bytes encode_envelope(const QueryEnvelope& env) {
    Fields f;
    f["session"] = env.session_id;
    f["user"] = std::to_string(env.user_id);
    f["query"] = to_hex(env.encrypted_query);
    if (env.group_key) f["group_key"] = *env.group_key;
    if (env.optional_requests) f["requests"] = *env.optional_requests;
    return encode_fields(f);
}

inline QueryEnvelope parse_envelope(const Bytes& body) {
    Fields f = parse_fields(body);
    QueryEnvelope env;
    env.session_id = require_field(f, "session");
    env.user_id = std::stoull(require_field(f, "user"));
    env.encrypted_query = from_hex(require_field(f, "query"));
    if (auto it = f.find("group_key"); it != f.end()) env.group_key = it->second;
    if (auto it = f.find("requests"); it != f.end()) env.optional_requests = it->second;
    return env;
}

enum class Status { rows, ack, denied, error };

inline std::string_view status_name(Status s) {
    switch (s) {
    case Status::rows: return "Rows";
    case Status::ack: return "Ack";
    case Status::denied: return "Denied";
    case Status::error: return "Error";
    }
    return "?";
}

inline Status parse_status(const std::string& s) {
    if (s == "Rows") return Status::rows;
    if (s == "Ack") return Status::ack;
    if (s == "Denied") return Status::denied;
    if (s == "Error") return Status::error;
    throw Error(Errc::protocol_error, "unknown status " + s);
}

/// Timings ride outside the sealed payload so harnesses can aggregate them
/// without a key. access = envelope receipt to result emission.
struct Timings {
    std::int64_t access_us = 0;
    std::int64_t activate_us = 0;
    std::int64_t deactivate_us = 0;
};

/// Rows/Ack carry a sealed payload; Denied and Error carry only a reason.
struct QueryOutcome {
    Status status = Status::error;
    Bytes payload;
    std::string reason;
    Timings timings;
};

inline Bytes encode_outcome(const QueryOutcome& o) {
    Fields f;
    f["status"] = std::string(status_name(o.status));
    if (!o.payload.empty()) f["payload"] = to_hex(o.payload);
    if (!o.reason.empty()) f["reason"] = o.reason;
    f["access_us"] = std::to_string(o.timings.access_us);
    f["activate_us"] = std::to_string(o.timings.activate_us);
    f["deactivate_us"] = std::to_string(o.timings.deactivate_us);
    return encode_fields(f);
}

inline QueryOutcome parse_outcome(const Bytes& body) {
    Fields f = parse_fields(body);
    QueryOutcome o;
    o.status = parse_status(require_field(f, "status"));
    if (auto it = f.find("payload"); it != f.end()) o.payload = from_hex(it->second);
    if (auto it = f.find("reason"); it != f.end()) o.reason = it->second;
    o.timings.access_us = std::stoll(require_field(f, "access_us"));
    o.timings.activate_us = std::stoll(require_field(f, "activate_us"));
    o.timings.deactivate_us = std::stoll(require_field(f, "deactivate_us"));
    return o;
}

// ---- result payload text -----------------------------------------------------
// The sealed payload decrypts to `key=value` lines as well: a `columns` CSV,
// one `row` per data row with tab-separated cells, `affected` for mutations
// and optionally `deckey` (hex) when sensitive access was requested and
// authorized. Cell text escapes backslash, tab and newline.

inline std::string escape_cell(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\t': out += "\\t"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string unescape_cell(std::string_view esc) {
    std::string out;
    out.reserve(esc.size());
    for (std::size_t i = 0; i < esc.size(); ++i) {
        if (esc[i] != '\\' || i + 1 == esc.size()) {
            out += esc[i];
            continue;
        }
        switch (esc[++i]) {
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        default: out += esc[i];
        }
    }
    return out;
}

inline std::vector<std::string> split_cells(std::string_view line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string_view::npos) {
            out.push_back(unescape_cell(line.substr(pos)));
            return out;
        }
        out.push_back(unescape_cell(line.substr(pos, tab - pos)));
        pos = tab + 1;
    }
}

} // namespace rolegate::gateway
