#include "repopulse/ingest/errors.hpp"

namespace repopulse::ingest {

std::string_view to_string(IngestErrc code) {
    switch (code) {
        case IngestErrc::repository_not_found:
            return "repository_not_found";
        case IngestErrc::branch_not_found:
            return "branch_not_found";
        case IngestErrc::unreadable_object:
            return "unreadable_object";
        case IngestErrc::corrupt_history:
            return "corrupt_history";
        case IngestErrc::clone_failed:
            return "clone_failed";
        case IngestErrc::invalid_source:
            return "invalid_source";
        case IngestErrc::authentication_failed:
            return "authentication_failed";
        case IngestErrc::rate_limited:
            return "rate_limited";
        case IngestErrc::remote_repository_not_found:
            return "remote_repository_not_found";
        case IngestErrc::malformed_payload:
            return "malformed_payload";
        case IngestErrc::network:
            return "network";
        case IngestErrc::fixture_missing:
            return "fixture_missing";
    }
    return "unknown";
}

bool is_retryable(IngestErrc code) {
    switch (code) {
        case IngestErrc::clone_failed:
        case IngestErrc::network:
        case IngestErrc::rate_limited:
        case IngestErrc::unreadable_object:
            return true;
        default:
            return false;
    }
}

}  // namespace repopulse::ingest
