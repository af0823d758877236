#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repopulse/ingest/line_counter.hpp"
#include "repopulse/metrics/types.hpp"

namespace repopulse::ingest {

struct ExtractOptions {
    std::shared_ptr<const LineCounter> counter = std::make_shared<PhysicalLineCounter>();
    SourceFilter filter;
};

/// Everything extracted from one first-parent walk of a branch.
struct CommitLog {
    std::vector<metrics::FileHistory> histories;  // sorted by path
    std::vector<metrics::CommitActivity> activity;
    std::string head_commit;  // empty for a repository without commits
    std::size_t commit_count = 0;

    bool operator==(const CommitLog&) const = default;
};

/// Read-only view of a local clone, driven through the git command line.
class GitRepository {
public:
    /// Throws IngestError(repository_not_found) unless `path` is a git
    /// repository (worktree or bare).
    explicit GitRepository(std::filesystem::path path);

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

    [[nodiscard]] bool has_commits() const;

    /// Commit id of the branch tip; tries refs/heads, then origin's remote
    /// branch, then the raw name. Throws IngestError(branch_not_found).
    [[nodiscard]] std::string resolve_branch(std::string_view branch) const;

    /// Commit ids along the first-parent chain from `tip`, newest first.
    [[nodiscard]] std::vector<std::string> first_parent_chain(std::string_view tip) const;

    /// Full first-parent walk. Per commit and file, delta_loc is the line
    /// count after the commit minus the count before it, so a rename appears
    /// as a deletion at the old path and an addition at the new one. Commit
    /// times are clamped to be non-decreasing along the chain.
    [[nodiscard]] CommitLog extract(std::string_view branch, const ExtractOptions& options = {}) const;

    /// Appends the commits after previous.head_commit when it lies on the
    /// branch's first-parent chain; otherwise re-extracts everything.
    [[nodiscard]] CommitLog extract_incremental(std::string_view branch, const CommitLog& previous,
                                                const ExtractOptions& options = {}) const;

    /// Runs git with the repository selected; returns stdout, throws on a
    /// non-zero exit.
    [[nodiscard]] std::string git(const std::vector<std::string>& args) const;

private:
    [[nodiscard]] CommitLog walk(const std::string& range, const std::string& head, const ExtractOptions& options,
                                 const CommitLog* previous) const;

    std::filesystem::path path_;
};

/// Convenience wrapper: the per-file histories of `branch` in the clone at
/// `repo_path`. An empty repository yields an empty list.
[[nodiscard]] std::vector<metrics::FileHistory> extract_commit_deltas(const std::filesystem::path& repo_path,
                                                                      std::string_view branch,
                                                                      const ExtractOptions& options = {});

}  // namespace repopulse::ingest
