#include "repopulse/ingest/git_history.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <unordered_map>

#include "repopulse/ingest/errors.hpp"
#include "repopulse/ingest/process.hpp"

namespace repopulse::ingest {

namespace {

constexpr std::string_view kNullSha = "0000000000000000000000000000000000000000";

struct FileChange {
    std::string old_mode;
    std::string new_mode;
    std::string old_sha;
    std::string new_sha;
    std::string path;
};

struct RawCommit {
    std::string sha;
    std::int64_t commit_time_s = 0;
    std::string author;
    std::vector<FileChange> changes;
};

const std::map<std::string, std::string>& git_env() {
    static const std::map<std::string, std::string> env{
        {"LC_ALL", "C"}, {"GIT_TERMINAL_PROMPT", "0"}, {"GIT_CONFIG_NOSYSTEM", "1"}, {"GIT_PAGER", "cat"}};
    return env;
}

bool is_regular_blob(std::string_view mode) { return mode == "100644" || mode == "100755" || mode == "100664"; }

std::vector<std::string_view> split_nul(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\0', start);
        if (end == std::string_view::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == '\n' || s.front() == ' ')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<RawCommit> parse_log(std::string_view text) {
    std::vector<RawCommit> commits;
    std::size_t pos = 0;
    while ((pos = text.find('\x01', pos)) != std::string_view::npos) {
        const auto next = text.find('\x01', pos + 1);
        const auto record = text.substr(pos + 1, next == std::string_view::npos ? std::string_view::npos : next - pos - 1);
        pos = next == std::string_view::npos ? text.size() : next;

        const auto tokens = split_nul(record);
        if (tokens.size() < 3) {
            throw IngestError(IngestErrc::unreadable_object, "unexpected git log record");
        }
        RawCommit c;
        c.sha = std::string(trim(tokens[0]));
        const auto ct = trim(tokens[1]);
        if (std::from_chars(ct.data(), ct.data() + ct.size(), c.commit_time_s).ec != std::errc{}) {
            throw IngestError(IngestErrc::unreadable_object, "bad commit time for " + c.sha);
        }
        c.author = std::string(trim(tokens[2]));
        for (std::size_t i = 3; i < tokens.size(); ++i) {
            const auto token = trim(tokens[i]);
            if (token.empty() || token.front() != ':') {
                continue;
            }
            if (i + 1 >= tokens.size()) {
                throw IngestError(IngestErrc::unreadable_object, "raw diff entry without path in " + c.sha);
            }
            // ":old_mode new_mode old_sha new_sha status"
            FileChange change;
            std::vector<std::string_view> fields;
            std::size_t f = 1;
            while (f < token.size()) {
                const auto sp = token.find(' ', f);
                fields.push_back(token.substr(f, sp == std::string_view::npos ? std::string_view::npos : sp - f));
                if (sp == std::string_view::npos) {
                    break;
                }
                f = sp + 1;
            }
            if (fields.size() < 5) {
                throw IngestError(IngestErrc::unreadable_object, "malformed raw diff entry in " + c.sha);
            }
            change.old_mode = std::string(fields[0]);
            change.new_mode = std::string(fields[1]);
            change.old_sha = std::string(fields[2]);
            change.new_sha = std::string(fields[3]);
            change.path = std::string(tokens[++i]);
            c.changes.push_back(std::move(change));
        }
        commits.push_back(std::move(c));
    }
    return commits;
}

/// Streams `git cat-file --batch` and counts each blob as it arrives.
class BlobCounter {
public:
    BlobCounter(const LineCounter& counter, std::unordered_map<std::string, std::int64_t>& sizes)
        : counter_(counter), sizes_(sizes) {}

    void feed(std::string_view chunk) {
        while (!chunk.empty()) {
            if (remaining_ < 0) {
                const auto nl = chunk.find('\n');
                if (nl == std::string_view::npos) {
                    header_.append(chunk);
                    return;
                }
                header_.append(chunk.substr(0, nl));
                chunk.remove_prefix(nl + 1);
                start_object();
                continue;
            }
            const auto take = std::min<std::size_t>(static_cast<std::size_t>(remaining_), chunk.size());
            content_.append(chunk.substr(0, take));
            remaining_ -= static_cast<std::int64_t>(take);
            chunk.remove_prefix(take);
            if (remaining_ == 0) {
                finish_object();
                // The trailing newline after the content is consumed as an
                // empty header on the next pass.
                skip_newline_ = true;
                remaining_ = -1;
            }
        }
    }

private:
    void start_object() {
        std::string header = std::move(header_);
        header_.clear();
        if (skip_newline_ && header.empty()) {
            skip_newline_ = false;
            return;
        }
        skip_newline_ = false;
        const auto sp1 = header.find(' ');
        if (sp1 == std::string::npos) {
            throw IngestError(IngestErrc::unreadable_object, "unexpected cat-file header: " + header);
        }
        current_ = header.substr(0, sp1);
        const auto rest = std::string_view(header).substr(sp1 + 1);
        if (rest == "missing" || rest.starts_with("ambiguous")) {
            throw IngestError(IngestErrc::unreadable_object, "object " + current_ + " is " + std::string(rest));
        }
        const auto sp2 = rest.find(' ');
        const auto size_text = rest.substr(sp2 + 1);
        std::int64_t size = 0;
        if (sp2 == std::string_view::npos ||
            std::from_chars(size_text.data(), size_text.data() + size_text.size(), size).ec != std::errc{}) {
            throw IngestError(IngestErrc::unreadable_object, "unexpected cat-file header: " + header);
        }
        content_.clear();
        remaining_ = size;
        if (size == 0) {
            finish_object();
            skip_newline_ = true;
            remaining_ = -1;
        }
    }

    void finish_object() { sizes_[current_] = looks_binary(content_) ? 0 : counter_.count(content_); }

    const LineCounter& counter_;
    std::unordered_map<std::string, std::int64_t>& sizes_;
    std::string header_;
    std::string content_;
    std::string current_;
    std::int64_t remaining_ = -1;
    bool skip_newline_ = false;
};

}  // namespace

GitRepository::GitRepository(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (!std::filesystem::is_directory(path_, ec)) {
        throw IngestError(IngestErrc::repository_not_found, "no such directory: " + path_.string());
    }
    const auto r = run_process({"git", "-C", path_.string(), "rev-parse", "--git-dir"}, {.input = {}, .env = git_env(), .on_stdout = {}});
    if (r.exit_code != 0) {
        throw IngestError(IngestErrc::repository_not_found, "not a git repository: " + path_.string());
    }
}

std::string GitRepository::git(const std::vector<std::string>& args) const {
    std::vector<std::string> argv{"git", "-C", path_.string()};
    argv.insert(argv.end(), args.begin(), args.end());
    const auto r = run_process(argv, {.input = {}, .env = git_env(), .on_stdout = {}});
    if (r.exit_code != 0) {
        throw IngestError(IngestErrc::unreadable_object, "git " + (args.empty() ? "" : args[0]) + " failed: " + r.err);
    }
    return r.out;
}

bool GitRepository::has_commits() const {
    return !trim(git({"rev-list", "-n", "1", "--all"})).empty();
}

std::string GitRepository::resolve_branch(std::string_view branch) const {
    if (branch.empty()) {
        throw IngestError(IngestErrc::branch_not_found, "empty branch name");
    }
    const std::string b(branch);
    for (const auto& candidate : {"refs/heads/" + b, "refs/remotes/origin/" + b, b}) {
        const auto r = run_process(
            {"git", "-C", path_.string(), "rev-parse", "--verify", "--quiet", "--end-of-options", candidate + "^{commit}"},
            {.input = {}, .env = git_env(), .on_stdout = {}});
        if (r.exit_code == 0) {
            return std::string(trim(r.out));
        }
    }
    throw IngestError(IngestErrc::branch_not_found, "branch not found: " + b);
}

std::vector<std::string> GitRepository::first_parent_chain(std::string_view tip) const {
    const auto out = git({"rev-list", "--first-parent", std::string(tip)});
    std::vector<std::string> chain;
    std::size_t start = 0;
    while (start < out.size()) {
        const auto nl = out.find('\n', start);
        const auto line = trim(std::string_view(out).substr(start, nl == std::string::npos ? std::string::npos : nl - start));
        if (!line.empty()) {
            chain.emplace_back(line);
        }
        if (nl == std::string::npos) {
            break;
        }
        start = nl + 1;
    }
    return chain;
}

CommitLog GitRepository::extract(std::string_view branch, const ExtractOptions& options) const {
    if (!has_commits()) {
        return {};
    }
    const auto head = resolve_branch(branch);
    return walk(head, head, options, nullptr);
}

CommitLog GitRepository::extract_incremental(std::string_view branch, const CommitLog& previous,
                                             const ExtractOptions& options) const {
    if (!has_commits()) {
        return {};
    }
    const auto head = resolve_branch(branch);
    if (previous.head_commit.empty()) {
        return walk(head, head, options, nullptr);
    }
    if (previous.head_commit == head) {
        return previous;
    }
    const auto chain = first_parent_chain(head);
    if (std::find(chain.begin(), chain.end(), previous.head_commit) == chain.end()) {
        return walk(head, head, options, nullptr);
    }
    try {
        return walk(previous.head_commit + ".." + head, head, options, &previous);
    } catch (const IngestError& e) {
        if (e.code() != IngestErrc::corrupt_history) {
            throw;
        }
        // The previous log disagrees with the repository; start over.
        return walk(head, head, options, nullptr);
    }
}

CommitLog GitRepository::walk(const std::string& range, const std::string& head, const ExtractOptions& options,
                              const CommitLog* previous) const {
    const auto raw = git({"-c", "log.showSignature=false", "log", "--first-parent", "--diff-merges=first-parent",
                          "--no-renames", "--raw", "--no-abbrev", "-z", "--reverse", "--no-color",
                          "--format=%x01%H%x00%ct%x00%ae%x00", range, "--"});
    const auto commits = parse_log(raw);

    // Count every blob we need in one cat-file pass.
    std::string wanted;
    std::unordered_map<std::string, std::int64_t> sizes;
    for (const auto& c : commits) {
        for (const auto& ch : c.changes) {
            if (!options.filter.accepts(ch.path)) {
                continue;
            }
            for (const auto& [mode, sha] : {std::pair{ch.old_mode, ch.old_sha}, std::pair{ch.new_mode, ch.new_sha}}) {
                if (is_regular_blob(mode) && sha != kNullSha && sizes.try_emplace(sha, -1).second) {
                    wanted += sha;
                    wanted += '\n';
                }
            }
        }
    }
    if (!wanted.empty()) {
        BlobCounter blobs(*options.counter, sizes);
        const auto r = run_process({"git", "-C", path_.string(), "cat-file", "--batch"},
                                   {.input = wanted, .env = git_env(), .on_stdout = [&](std::string_view chunk) {
                                        blobs.feed(chunk);
                                    }});
        if (r.exit_code != 0) {
            throw IngestError(IngestErrc::unreadable_object, "git cat-file failed: " + r.err);
        }
        for (const auto& [sha, n] : sizes) {
            if (n < 0) {
                throw IngestError(IngestErrc::unreadable_object, "blob " + sha + " was not returned");
            }
        }
    }
    const auto blob_size = [&](const std::string& mode, const std::string& sha) -> std::int64_t {
        if (!is_regular_blob(mode) || sha == kNullSha) {
            return 0;
        }
        return sizes.at(sha);
    };

    std::map<std::string, metrics::FileHistory> by_path;
    CommitLog log;
    Instant clamp = from_epoch_ms(std::numeric_limits<std::int64_t>::min());
    if (previous != nullptr) {
        for (const auto& h : previous->histories) {
            by_path.emplace(h.file_path, h);
            if (!h.deltas.empty()) {
                clamp = std::max(clamp, h.deltas.back().timestamp);
            }
        }
        log.activity = previous->activity;
        log.commit_count = previous->commit_count;
        for (const auto& a : previous->activity) {
            clamp = std::max(clamp, a.timestamp);
        }
    }

    for (const auto& c : commits) {
        const auto t = std::max(clamp, from_epoch_ms(c.commit_time_s * kMillisPerSecond));
        clamp = t;
        log.activity.push_back(metrics::CommitActivity{c.author, t});
        ++log.commit_count;
        for (const auto& ch : c.changes) {
            if (!options.filter.accepts(ch.path)) {
                continue;
            }
            const auto delta = blob_size(ch.new_mode, ch.new_sha) - blob_size(ch.old_mode, ch.old_sha);
            auto& h = by_path[ch.path];
            h.file_path = ch.path;
            h.deltas.push_back(metrics::CommitDelta{ch.path, t, delta});
        }
    }

    log.head_commit = head;
    log.histories.reserve(by_path.size());
    for (auto& [path, h] : by_path) {
        try {
            h.validate();
        } catch (const metrics::MetricsError& e) {
            throw IngestError(IngestErrc::corrupt_history, e.what());
        }
        log.histories.push_back(std::move(h));
    }
    return log;
}

std::vector<metrics::FileHistory> extract_commit_deltas(const std::filesystem::path& repo_path,
                                                        std::string_view branch, const ExtractOptions& options) {
    return GitRepository(repo_path).extract(branch, options).histories;
}

}  // namespace repopulse::ingest
