#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repopulse::ingest {

enum class IngestErrc {
    repository_not_found,
    branch_not_found,
    unreadable_object,
    corrupt_history,
    clone_failed,
    invalid_source,
    authentication_failed,
    rate_limited,
    remote_repository_not_found,
    malformed_payload,
    network,
    fixture_missing,
};

[[nodiscard]] std::string_view to_string(IngestErrc code);

/// Whether a retry has any chance of succeeding.
[[nodiscard]] bool is_retryable(IngestErrc code);

class IngestError : public std::runtime_error {
public:
    IngestError(IngestErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] IngestErrc code() const noexcept { return code_; }
    [[nodiscard]] bool retryable() const noexcept { return is_retryable(code_); }

private:
    IngestErrc code_;
};

}  // namespace repopulse::ingest
