#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "repopulse/common/time.hpp"
#include "repopulse/ingest/git_history.hpp"
#include "repopulse/ingest/issues.hpp"
#include "repopulse/ingest/source.hpp"
#include "repopulse/metrics/types.hpp"

namespace repopulse::ingest {

struct IngestSnapshot {
    std::vector<metrics::FileHistory> histories;
    std::vector<metrics::IssueRecord> issues;
    Instant fetched_at;
    std::string head_commit;
    std::vector<metrics::CommitActivity> activity;
    std::size_t commit_count = 0;
    /// Newest issue update time, for incremental issue fetches.
    std::optional<Instant> issues_cursor;

    bool operator==(const IngestSnapshot&) const = default;

    [[nodiscard]] CommitLog commit_log() const { return {histories, activity, head_commit, commit_count}; }
};

/// Keeps one mirror clone per source under `workdir/mirrors` and turns it,
/// plus an issue source, into snapshots.
class Ingestor {
public:
    Ingestor(std::filesystem::path workdir, Clock& clock, ExtractOptions options = {});

    /// Clones (first time) or fetches, then extracts history and issues. With
    /// `previous`, history and issues are extended incrementally where
    /// possible. Every event in the result is at or before fetched_at.
    [[nodiscard]] IngestSnapshot snapshot(const RepoSource& source, IssueSource& issues,
                                          const IngestSnapshot* previous = nullptr);

    /// Brings the local mirror up to date and returns its path. A failed first
    /// clone leaves nothing behind.
    std::filesystem::path sync_mirror(const RepoSource& source);

    [[nodiscard]] std::filesystem::path mirror_path(const RepoSource& source) const;

private:
    std::mutex& lock_for(const std::filesystem::path& mirror);

    std::filesystem::path workdir_;
    Clock& clock_;
    ExtractOptions options_;
    std::mutex locks_mutex_;
    std::map<std::filesystem::path, std::unique_ptr<std::mutex>> locks_;
};

}  // namespace repopulse::ingest
