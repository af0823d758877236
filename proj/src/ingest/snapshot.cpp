#include "repopulse/ingest/snapshot.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>

#include "repopulse/common/hash.hpp"
#include "repopulse/ingest/errors.hpp"
#include "repopulse/ingest/process.hpp"

namespace repopulse::ingest {

namespace {

const std::map<std::string, std::string> kGitEnv{
    {"LC_ALL", "C"}, {"GIT_TERMINAL_PROMPT", "0"}, {"GIT_CONFIG_NOSYSTEM", "1"}, {"GIT_ASKPASS", "true"}};

std::string last_line(const std::string& text) {
    auto end = text.find_last_not_of("\n ");
    if (end == std::string::npos) {
        return {};
    }
    const auto start = text.rfind('\n', end);
    return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

template <typename F>
auto with_provenance(std::string_view stage, F&& f) {
    try {
        return f();
    } catch (const IngestError& e) {
        throw IngestError(e.code(), std::string(stage) + ": " + e.what());
    } catch (const std::system_error& e) {
        throw IngestError(IngestErrc::clone_failed, std::string(stage) + ": " + e.what());
    }
}

void clamp_to(std::vector<metrics::FileHistory>& histories, std::vector<metrics::CommitActivity>& activity,
              std::vector<metrics::IssueRecord>& issues, Instant limit) {
    for (auto& h : histories) {
        for (auto& d : h.deltas) {
            d.timestamp = std::min(d.timestamp, limit);
        }
    }
    for (auto& a : activity) {
        a.timestamp = std::min(a.timestamp, limit);
    }
    for (auto& i : issues) {
        i.opened_at = std::min(i.opened_at, limit);
        if (i.closed_at) {
            i.closed_at = std::min(*i.closed_at, limit);
        }
    }
}

}  // namespace

Ingestor::Ingestor(std::filesystem::path workdir, Clock& clock, ExtractOptions options)
    : workdir_(std::move(workdir)), clock_(clock), options_(std::move(options)) {}

std::filesystem::path Ingestor::mirror_path(const RepoSource& source) const {
    std::string stem;
    for (const char c : source.slug ? source.slug->owner + "_" + source.slug->name : std::string{}) {
        stem += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_';
    }
    if (!stem.empty()) {
        stem += '-';
    }
    return workdir_ / "mirrors" / (stem + to_hex(fnv1a64(source.clone_url)) + ".git");
}

std::mutex& Ingestor::lock_for(const std::filesystem::path& mirror) {
    std::lock_guard guard(locks_mutex_);
    auto& slot = locks_[mirror];
    if (!slot) {
        slot = std::make_unique<std::mutex>();
    }
    return *slot;
}

std::filesystem::path Ingestor::sync_mirror(const RepoSource& source) {
    source.validate();
    const auto mirror = mirror_path(source);
    std::error_code ec;
    if (std::filesystem::is_directory(mirror / "objects", ec)) {
        const auto r = run_process({"git", "-C", mirror.string(), "fetch", "--prune", "--quiet", "origin"},
                                   {.input = {}, .env = kGitEnv, .on_stdout = {}});
        if (r.exit_code != 0) {
            throw IngestError(IngestErrc::clone_failed, "fetch from " + source.clone_url + " failed: " + last_line(r.err));
        }
        return mirror;
    }

    std::filesystem::create_directories(mirror.parent_path());
    static std::atomic<unsigned> counter{0};
    const auto tmp = mirror.parent_path() /
                     (".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(tmp, ec);
    const auto r = run_process({"git", "clone", "--mirror", "--quiet", "--", source.clone_url, tmp.string()},
                               {.input = {}, .env = kGitEnv, .on_stdout = {}});
    if (r.exit_code != 0) {
        std::filesystem::remove_all(tmp, ec);
        throw IngestError(IngestErrc::clone_failed, "clone of " + source.clone_url + " failed: " + last_line(r.err));
    }
    std::filesystem::rename(tmp, mirror, ec);
    if (ec) {
        std::filesystem::remove_all(tmp);
        if (!std::filesystem::is_directory(mirror / "objects")) {
            throw IngestError(IngestErrc::clone_failed, "cannot install mirror: " + ec.message());
        }
    }
    return mirror;
}

IngestSnapshot Ingestor::snapshot(const RepoSource& source, IssueSource& issues, const IngestSnapshot* previous) {
    with_provenance("source", [&] {
        source.validate();
        return 0;
    });
    const auto mirror = mirror_path(source);
    std::lock_guard guard(lock_for(mirror));

    with_provenance("clone", [&] { return sync_mirror(source); });

    IngestSnapshot snap;
    const auto log = with_provenance("history", [&] {
        const GitRepository repo(mirror);
        if (previous != nullptr) {
            return repo.extract_incremental(source.default_branch, previous->commit_log(), options_);
        }
        return repo.extract(source.default_branch, options_);
    });
    snap.histories = log.histories;
    snap.activity = log.activity;
    snap.head_commit = log.head_commit;
    snap.commit_count = log.commit_count;

    const bool incremental_issues = previous != nullptr && previous->issues_cursor.has_value();
    auto fetched = with_provenance("issues", [&] {
        return issues.fetch(source, incremental_issues ? previous->issues_cursor : std::nullopt);
    });
    if (incremental_issues) {
        std::map<std::string, metrics::IssueRecord> by_id;
        for (const auto& i : previous->issues) {
            by_id[i.issue_id] = i;
        }
        for (auto& i : fetched.issues) {
            by_id[i.issue_id] = std::move(i);
        }
        snap.issues.clear();
        for (auto& [id, rec] : by_id) {
            snap.issues.push_back(std::move(rec));
        }
        std::sort(snap.issues.begin(), snap.issues.end(), [](const auto& a, const auto& b) {
            return std::tie(a.opened_at, a.issue_id) < std::tie(b.opened_at, b.issue_id);
        });
        snap.issues_cursor = fetched.newest_update ? std::max(*fetched.newest_update, *previous->issues_cursor)
                                                   : previous->issues_cursor;
    } else {
        snap.issues = std::move(fetched.issues);
        snap.issues_cursor = fetched.newest_update;
    }

    snap.fetched_at = clock_.now();
    clamp_to(snap.histories, snap.activity, snap.issues, snap.fetched_at);
    return snap;
}

}  // namespace repopulse::ingest
