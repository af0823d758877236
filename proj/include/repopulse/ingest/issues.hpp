#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "repopulse/common/time.hpp"
#include "repopulse/ingest/http.hpp"
#include "repopulse/ingest/source.hpp"
#include "repopulse/metrics/types.hpp"

namespace repopulse::ingest {

struct FetchedIssues {
    std::vector<metrics::IssueRecord> issues;  // sorted by opened_at, then id
    /// Newest platform update time seen; the cursor for the next incremental fetch.
    std::optional<Instant> newest_update;
};

struct GitHubOptions {
    std::string api_base = "https://api.github.com";
    std::optional<std::string> token;
    /// Upper bound on consecutive rate-limit waits before giving up.
    int max_rate_limit_waits = 5;
};

/// Issues (pull requests excluded) of a repository through the platform's
/// paginated REST listing. Rate-limit responses are honoured by sleeping on
/// `clock` until the advertised reset.
[[nodiscard]] FetchedIssues fetch_issues(const RepoSource& source, HttpClient& http, Clock& clock,
                                         const GitHubOptions& options = {},
                                         std::optional<Instant> updated_since = std::nullopt);

/// issues.json: array of {id, opened_at, closed_at?} with RFC 3339 times.
[[nodiscard]] std::vector<metrics::IssueRecord> load_issues_json(const std::filesystem::path& path);
[[nodiscard]] std::vector<metrics::IssueRecord> parse_issues_json(std::string_view text);
[[nodiscard]] std::string issues_to_json(const std::vector<metrics::IssueRecord>& issues);

/// Throws IngestError(malformed_payload) on duplicate ids or closed_at < opened_at.
void validate_issues(const std::vector<metrics::IssueRecord>& issues);

/// Where the issue half of a snapshot comes from.
class IssueSource {
public:
    virtual ~IssueSource() = default;
    [[nodiscard]] virtual FetchedIssues fetch(const RepoSource& source, std::optional<Instant> updated_since) = 0;
};

class GitHubIssueSource final : public IssueSource {
public:
    GitHubIssueSource(std::shared_ptr<HttpClient> http, Clock& clock, GitHubOptions options)
        : http_(std::move(http)), clock_(clock), options_(std::move(options)) {}
    [[nodiscard]] FetchedIssues fetch(const RepoSource& source, std::optional<Instant> updated_since) override;

private:
    std::shared_ptr<HttpClient> http_;
    Clock& clock_;
    GitHubOptions options_;
};

/// A fixed issues.json file; always a full listing.
class FileIssueSource final : public IssueSource {
public:
    explicit FileIssueSource(std::filesystem::path path) : path_(std::move(path)) {}
    [[nodiscard]] FetchedIssues fetch(const RepoSource& source, std::optional<Instant> updated_since) override;

private:
    std::filesystem::path path_;
};

/// For hosts without an issue tracker.
class NoIssueSource final : public IssueSource {
public:
    [[nodiscard]] FetchedIssues fetch(const RepoSource&, std::optional<Instant>) override { return {}; }
};

}  // namespace repopulse::ingest
