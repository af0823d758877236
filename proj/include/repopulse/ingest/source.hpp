#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace repopulse::ingest {

enum class HostKind { github, generic_git };

[[nodiscard]] std::string_view to_string(HostKind kind);

/// Owner and repository name as the hosting platform knows them.
struct RepoSlug {
    std::string owner;
    std::string name;

    bool operator==(const RepoSlug&) const = default;
};

struct RepoSource {
    std::string clone_url;
    std::string default_branch;
    HostKind host_kind = HostKind::generic_git;
    /// Needed for issue lookups on github hosts.
    std::optional<RepoSlug> slug;

    bool operator==(const RepoSource&) const = default;

    /// Throws IngestError(invalid_source) on an unparseable URL or empty branch.
    void validate() const;
};

/// Accepts scheme://host/path URLs (https, http, ssh, git, file) and
/// scp-style user@host:path.
[[nodiscard]] bool is_valid_clone_url(std::string_view url);

/// Owner / repository names as the platform accepts them: alphanumerics plus
/// "-", "_" and ".", not "." or "..".
[[nodiscard]] bool is_valid_identifier(std::string_view id);
/// Git ref-name rules, simplified.
[[nodiscard]] bool is_valid_branch(std::string_view branch);

/// Replaces {owner}, {name} and {branch} in a clone URL template such as
/// "https://github.com/{owner}/{name}.git".
[[nodiscard]] std::string expand_url_template(std::string_view tmpl, const RepoSlug& slug, std::string_view branch);

}  // namespace repopulse::ingest
