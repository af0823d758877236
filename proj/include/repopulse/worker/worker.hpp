#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "repopulse/common/time.hpp"
#include "repopulse/ingest/snapshot.hpp"
#include "repopulse/ingest/source.hpp"
#include "repopulse/store/store.hpp"

namespace repopulse::worker {

enum class JobKind { initial_analysis, refresh };

[[nodiscard]] std::string_view to_string(JobKind k);

/// A unit of work for one project, persisted at jobs/<project_id>. Its
/// existence is what makes a job live.
struct Job {
    std::string project_id;
    JobKind kind = JobKind::initial_analysis;
    int attempt = 1;
    Instant enqueued_at;
    /// Backoff: the job is not due before this instant.
    Instant not_before;
    std::optional<std::string> last_error;

    bool operator==(const Job&) const = default;
};

[[nodiscard]] wire::Json job_to_json(const Job& job);
[[nodiscard]] Job job_from_json(const wire::Json& doc);

enum class Outcome { published, failed, retry_scheduled };

[[nodiscard]] std::string_view to_string(Outcome o);

struct WorkerOptions {
    std::filesystem::path workdir = "work";
    /// Expanded with {owner}, {name} and {branch} to get the clone URL.
    std::string clone_url_template = "https://github.com/{owner}/{name}.git";
    ingest::HostKind host_kind = ingest::HostKind::github;
    /// 0 means one per processor.
    unsigned worker_count = 0;
    int max_attempts = 3;
    Millis backoff_base{30'000};
    double backoff_factor = 4.0;
    Millis refresh_interval{24LL * 3600 * 1000};
    ingest::ExtractOptions extract;
    /// Called after both series are stored and before the tracked transition.
    std::function<void(const std::string& project_id)> after_series_put;
};

/// Chooses where a project's issues come from.
using IssueSourceFactory = std::function<std::shared_ptr<ingest::IssueSource>(const store::ProjectRecord&)>;

/// Delay before attempt `next_attempt` (2, 3, ...): base * factor^(next-2).
[[nodiscard]] Millis backoff_delay(const WorkerOptions& options, int next_attempt);

/// Turns pending and tracked projects into jobs and runs them. The scheduler
/// and the API share only the store; all queue state lives there too.
class Worker {
public:
    Worker(store::Store& store, WorkerOptions options, IssueSourceFactory issues);

    /// One initial_analysis job per pending project without a live job.
    std::vector<Job> enqueue_pending();

    /// One refresh job per tracked project that has no live job and has not
    /// been analyzed or scheduled within the refresh interval.
    std::vector<Job> schedule_refresh();

    [[nodiscard]] std::vector<Job> live_jobs() const;
    [[nodiscard]] std::optional<Job> find_job(std::string_view project_id) const;

    /// One attempt. On a retryable error with attempts left, the job is
    /// rewritten with attempt+1 and a backoff deadline. nullopt when another
    /// worker holds the project.
    std::optional<Outcome> run_job(const Job& job);

    /// Runs every due live job once, `worker_count` at a time. Jobs another
    /// worker is running are skipped.
    std::size_t run_due();

    /// enqueue_pending, schedule_refresh, then run_due until no live job is
    /// left, sleeping on the clock until the next backoff deadline.
    std::size_t drain();

    /// The service loop: enqueue, schedule, run what is due, then sleep `poll`
    /// on the clock, until stopped.
    void run(std::stop_token stop, Millis poll);

    /// Operator veto: pending to failed, dropping any queued job.
    store::ProjectRecord veto(std::string_view project_id, const std::string& reason);

    [[nodiscard]] ingest::RepoSource source_for(const store::ProjectRecord& project) const;
    [[nodiscard]] const WorkerOptions& options() const { return options_; }

private:
    void publish(const store::ProjectRecord& project, const ingest::IngestSnapshot& snapshot);
    /// Returns false when another worker holds the claim.
    bool claim(const std::string& project_id);
    void release(const std::string& project_id);
    void write_job(const Job& job);
    [[nodiscard]] unsigned pool_size() const;

    Outcome execute(const Job& job);

    store::Store& store_;
    WorkerOptions options_;
    IssueSourceFactory issues_;
    ingest::Ingestor ingestor_;
};

}  // namespace repopulse::worker
