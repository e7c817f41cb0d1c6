#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rolegate {

enum class Errc {
    // crypto
    generation_failure,
    plaintext_out_of_range,
    invalid_ciphertext,
    key_mismatch,
    auth_tag_mismatch,
    encoding_overflow,
    bad_encoding,
    // hierarchy
    parent_not_found,
    duplicate_role_name,
    role_not_found,
    role_in_use,
    cannot_delete_root,
    // rbac
    user_not_found,
    group_auth_failure,
    no_activatable_role,
    not_activated,
    column_denied,
    table_denied,
    // sql
    syntax_error,
    unsupported_feature,
    // catalog
    not_found,
    referential_violation,
    tenant_mismatch,
    execution_error,
    // session
    auth_failure,
    tenant_unknown,
    invalid_phase,
    session_not_found,
    // gateway / io
    malformed_frame,
    protocol_error,
    io_error,
    config_error,
    invalid_argument,
};

inline std::string_view errc_name(Errc c) {
    switch (c) {
    case Errc::generation_failure: return "GenerationFailure";
    case Errc::plaintext_out_of_range: return "PlaintextOutOfRange";
    case Errc::invalid_ciphertext: return "InvalidCiphertext";
    case Errc::key_mismatch: return "KeyMismatch";
    case Errc::auth_tag_mismatch: return "AuthenticationTagMismatch";
    case Errc::encoding_overflow: return "EncodingOverflow";
    case Errc::bad_encoding: return "BadEncoding";
    case Errc::parent_not_found: return "ParentNotFound";
    case Errc::duplicate_role_name: return "DuplicateRoleName";
    case Errc::role_not_found: return "RoleNotFound";
    case Errc::role_in_use: return "RoleInUse";
    case Errc::cannot_delete_root: return "CannotDeleteRootWithChildren";
    case Errc::user_not_found: return "UserNotFound";
    case Errc::group_auth_failure: return "GroupAuthFailure";
    case Errc::no_activatable_role: return "NoActivatableRole";
    case Errc::not_activated: return "NotActivated";
    case Errc::column_denied: return "ColumnDenied";
    case Errc::table_denied: return "TableDenied";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::unsupported_feature: return "UnsupportedFeature";
    case Errc::not_found: return "NotFound";
    case Errc::referential_violation: return "ReferentialViolation";
    case Errc::tenant_mismatch: return "TenantMismatch";
    case Errc::execution_error: return "ExecutionError";
    case Errc::auth_failure: return "AuthFailure";
    case Errc::tenant_unknown: return "TenantUnknown";
    case Errc::invalid_phase: return "InvalidPhase";
    case Errc::session_not_found: return "SessionNotFound";
    case Errc::malformed_frame: return "MalformedFrame";
    case Errc::protocol_error: return "ProtocolError";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
    case Errc::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

inline constexpr Errc kAllErrcs[] = {
    Errc::generation_failure, Errc::plaintext_out_of_range, Errc::invalid_ciphertext,
    Errc::key_mismatch, Errc::auth_tag_mismatch, Errc::encoding_overflow,
    Errc::bad_encoding, Errc::parent_not_found, Errc::duplicate_role_name,
    Errc::role_not_found, Errc::role_in_use, Errc::cannot_delete_root,
    Errc::user_not_found, Errc::group_auth_failure, Errc::no_activatable_role,
    Errc::not_activated, Errc::column_denied, Errc::table_denied, Errc::syntax_error,
    Errc::unsupported_feature, Errc::not_found, Errc::referential_violation,
    Errc::tenant_mismatch, Errc::execution_error, Errc::auth_failure,
    Errc::tenant_unknown, Errc::invalid_phase, Errc::session_not_found,
    Errc::malformed_frame, Errc::protocol_error, Errc::io_error, Errc::config_error,
    Errc::invalid_argument,
};

inline std::optional<Errc> errc_from_name(std::string_view name) {
    for (Errc c : kAllErrcs) {
        if (errc_name(c) == name) return c;
    }
    return std::nullopt;
}

/// Library-wide exception. `position` is a 1-based byte offset (SQL errors),
/// `items` carries offending identifiers (e.g. denied columns).
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Error(Errc code, std::string message, std::size_t position)
        : std::runtime_error(std::string(errc_name(code)) + " at byte " +
                             std::to_string(position) + ": " + message),
          code_(code), position_(position) {}

    Error(Errc code, std::string message, std::vector<std::string> items)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code), items_(std::move(items)) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }
    [[nodiscard]] std::size_t position() const noexcept { return position_; }
    [[nodiscard]] const std::vector<std::string>& items() const noexcept { return items_; }

private:
    Errc code_;
    std::size_t position_ = 0;
    std::vector<std::string> items_;
};

[[noreturn]] inline void raise(Errc code, std::string message) {
    throw Error(code, std::move(message));
}

} // namespace rolegate
