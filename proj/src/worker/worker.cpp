#include "repopulse/worker/worker.hpp"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>
#include <spdlog/spdlog.h>
#include <thread>

#include "repopulse/ingest/errors.hpp"
#include "repopulse/metrics/metrics.hpp"

namespace repopulse::worker {

namespace {

constexpr std::string_view kJobs = "jobs";
constexpr std::string_view kClaims = "claims";
constexpr std::string_view kRefresh = "refresh";

/// A claim left by another host is honoured for this long.
constexpr Millis kForeignClaimLease{3600LL * 1000};

std::string key(std::string_view prefix, std::string_view id) { return std::string(prefix) + "/" + std::string(id); }

std::string hostname() {
    char buf[256] = {};
    if (::gethostname(buf, sizeof buf - 1) != 0) {
        return "localhost";
    }
    return buf;
}

bool process_alive(long pid) { return pid > 0 && (::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM); }

// Projects claimed by any Worker in this process.
std::mutex g_claimed_mutex;
std::set<std::string> g_claimed;

wire::Json parse_doc(const std::string& text, std::string_view what) {
    try {
        return wire::Json::parse(text);
    } catch (const wire::Json::parse_error& e) {
        throw store::StoreError(store::StoreErrc::corrupt, std::string(what) + ": " + e.what());
    }
}

struct Failure {
    std::string reason;
    bool retryable = false;
};

Failure classify(const std::exception_ptr& error) {
    try {
        std::rethrow_exception(error);
    } catch (const ingest::IngestError& e) {
        return {std::string(ingest::to_string(e.code())) + ": " + e.what(), e.retryable()};
    } catch (const store::StoreError& e) {
        return {std::string("store ") + std::string(store::to_string(e.code())) + ": " + e.what(),
                e.code() == store::StoreErrc::io};
    } catch (const metrics::MetricsError& e) {
        return {std::string("metrics: ") + e.what(), false};
    } catch (const std::exception& e) {
        return {e.what(), false};
    }
}

}  // namespace

std::string_view to_string(JobKind k) { return k == JobKind::initial_analysis ? "initial_analysis" : "refresh"; }

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::published:
            return "published";
        case Outcome::failed:
            return "failed";
        case Outcome::retry_scheduled:
            return "retry_scheduled";
    }
    return "unknown";
}

wire::Json job_to_json(const Job& job) {
    wire::Json j;
    j["project_id"] = job.project_id;
    j["kind"] = to_string(job.kind);
    j["attempt"] = job.attempt;
    j["enqueued_at"] = format_rfc3339(job.enqueued_at);
    j["not_before"] = format_rfc3339(job.not_before);
    j["last_error"] = job.last_error ? wire::Json(*job.last_error) : wire::Json(nullptr);
    return j;
}

Job job_from_json(const wire::Json& doc) {
    try {
        Job job;
        job.project_id = doc.at("project_id").get<std::string>();
        const auto kind = doc.at("kind").get<std::string>();
        if (kind == "initial_analysis") {
            job.kind = JobKind::initial_analysis;
        } else if (kind == "refresh") {
            job.kind = JobKind::refresh;
        } else {
            throw std::invalid_argument("unknown job kind " + kind);
        }
        job.attempt = doc.at("attempt").get<int>();
        if (job.attempt < 1) {
            throw std::invalid_argument("attempt must be at least 1");
        }
        job.enqueued_at = parse_rfc3339(doc.at("enqueued_at").get<std::string>());
        job.not_before = parse_rfc3339(doc.at("not_before").get<std::string>());
        if (const auto& e = doc.at("last_error"); !e.is_null()) {
            job.last_error = e.get<std::string>();
        }
        return job;
    } catch (const std::exception& e) {
        throw store::StoreError(store::StoreErrc::corrupt, std::string("job document: ") + e.what());
    }
}

Millis backoff_delay(const WorkerOptions& options, int next_attempt) {
    const double scale = std::pow(options.backoff_factor, std::max(0, next_attempt - 2));
    return Millis{static_cast<std::int64_t>(std::llround(static_cast<double>(options.backoff_base.count()) * scale))};
}

Worker::Worker(store::Store& store, WorkerOptions options, IssueSourceFactory issues)
    : store_(store),
      options_(std::move(options)),
      issues_(std::move(issues)),
      ingestor_(options_.workdir, store.clock(), options_.extract) {}

unsigned Worker::pool_size() const {
    if (options_.worker_count > 0) {
        return options_.worker_count;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

ingest::RepoSource Worker::source_for(const store::ProjectRecord& project) const {
    const ingest::RepoSlug slug{project.owner, project.name};
    ingest::RepoSource source{
        .clone_url = ingest::expand_url_template(options_.clone_url_template, slug, project.branch),
        .default_branch = project.branch,
        .host_kind = options_.host_kind,
        .slug = slug,
    };
    source.validate();
    return source;
}

void Worker::write_job(const Job& job) { store_.documents().put(key(kJobs, job.project_id), wire::render(job_to_json(job))); }

std::optional<Job> Worker::find_job(std::string_view project_id) const {
    const auto text = store_.documents().get(key(kJobs, project_id));
    if (!text) {
        return std::nullopt;
    }
    return job_from_json(parse_doc(*text, "job"));
}

std::vector<Job> Worker::live_jobs() const {
    std::vector<Job> out;
    for (const auto& k : store_.documents().list(kJobs)) {
        if (const auto text = store_.documents().get(k)) {
            out.push_back(job_from_json(parse_doc(*text, "job")));
        }
    }
    return out;
}

std::vector<Job> Worker::enqueue_pending() {
    std::vector<Job> created;
    store_.documents().exclusive([&] {
        const auto now = store_.clock().now();
        std::set<std::string> pending;
        for (const auto& p : store_.list_projects(store::ProjectState::pending)) {
            pending.insert(p.project_id);
            if (!store_.documents().get(key(kJobs, p.project_id))) {
                Job job{.project_id = p.project_id,
                        .kind = JobKind::initial_analysis,
                        .attempt = 1,
                        .enqueued_at = now,
                        .not_before = now,
                        .last_error = std::nullopt};
                write_job(job);
                created.push_back(std::move(job));
            }
        }
        // Initial jobs whose project left pending (vetoed, say) are stale.
        for (const auto& job : live_jobs()) {
            if (job.kind == JobKind::initial_analysis && !pending.contains(job.project_id)) {
                std::lock_guard lock(g_claimed_mutex);
                if (!g_claimed.contains(job.project_id)) {
                    store_.documents().remove(key(kJobs, job.project_id));
                }
            }
        }
    });
    return created;
}

std::vector<Job> Worker::schedule_refresh() {
    std::vector<Job> created;
    store_.documents().exclusive([&] {
        const auto now = store_.clock().now();
        for (const auto& p : store_.list_projects(store::ProjectState::tracked)) {
            if (store_.documents().get(key(kJobs, p.project_id))) {
                continue;
            }
            auto last = p.last_analyzed_at.value_or(p.requested_at);
            wire::Json marker = wire::Json::object();
            if (const auto text = store_.documents().get(key(kRefresh, p.project_id))) {
                marker = parse_doc(*text, "refresh marker");
                if (marker.contains("scheduled_at")) {
                    last = std::max(last, parse_rfc3339(marker["scheduled_at"].get<std::string>()));
                }
            }
            if (now - last < options_.refresh_interval) {
                continue;
            }
            Job job{.project_id = p.project_id,
                    .kind = JobKind::refresh,
                    .attempt = 1,
                    .enqueued_at = now,
                    .not_before = now,
                    .last_error = std::nullopt};
            write_job(job);
            marker["scheduled_at"] = format_rfc3339(now);
            store_.documents().put(key(kRefresh, p.project_id), wire::render(marker));
            created.push_back(std::move(job));
        }
    });
    return created;
}

bool Worker::claim(const std::string& project_id) {
    {
        std::lock_guard lock(g_claimed_mutex);
        if (!g_claimed.insert(project_id).second) {
            return false;
        }
    }
    bool ok = false;
    store_.documents().exclusive([&] {
        const auto now = store_.clock().now();
        const auto self_host = hostname();
        if (const auto text = store_.documents().get(key(kClaims, project_id))) {
            const auto doc = parse_doc(*text, "claim");
            const auto pid = doc.value("pid", 0L);
            const auto host = doc.value("host", std::string{});
            const auto at = parse_rfc3339(doc.value("claimed_at", format_rfc3339(now)));
            const bool held = host == self_host ? (pid != ::getpid() && process_alive(pid))
                                                : now - at < kForeignClaimLease;
            if (held) {
                return;
            }
        }
        wire::Json doc;
        doc["pid"] = static_cast<long>(::getpid());
        doc["host"] = self_host;
        doc["claimed_at"] = format_rfc3339(now);
        store_.documents().put(key(kClaims, project_id), wire::render(doc));
        ok = true;
    });
    if (!ok) {
        std::lock_guard lock(g_claimed_mutex);
        g_claimed.erase(project_id);
    }
    return ok;
}

void Worker::release(const std::string& project_id) {
    store_.documents().remove(key(kClaims, project_id));
    std::lock_guard lock(g_claimed_mutex);
    g_claimed.erase(project_id);
}

void Worker::publish(const store::ProjectRecord& project, const ingest::IngestSnapshot& snapshot) {
    const auto range = metrics::analysis_range(snapshot.histories, snapshot.issues, snapshot.fetched_at);
    for (const auto g : {metrics::Granularity::week, metrics::Granularity::month}) {
        metrics::MetricSeries series{.granularity = g, .samples = {}};
        if (range) {
            series = metrics::build_series(snapshot.histories, snapshot.issues, *range, g);
        }
        store_.put_series({project.project_id, g}, series);
    }
}

std::optional<Outcome> Worker::run_job(const Job& job) {
    if (!claim(job.project_id)) {
        return std::nullopt;
    }
    struct Release {
        Worker& w;
        const std::string& id;
        ~Release() { w.release(id); }
    } release_on_exit{*this, job.project_id};
    return execute(job);
}

Outcome Worker::execute(const Job& requested) {
    // The stored job is authoritative; it may have moved on since listing.
    auto current = find_job(requested.project_id);
    if (!current) {
        return Outcome::failed;
    }
    const Job job = *current;
    const auto project = store_.find_project(job.project_id);
    if (!project || project->state == store::ProjectState::failed) {
        store_.documents().remove(key(kJobs, job.project_id));
        return Outcome::failed;
    }

    std::exception_ptr error;
    try {
        const auto source = source_for(*project);
        const auto previous = store_.find_snapshot(project->project_id);
        auto issues = issues_(*project);
        const auto snapshot = ingestor_.snapshot(source, *issues, previous ? &*previous : nullptr);
        store_.put_snapshot(project->project_id, snapshot);
        publish(*project, snapshot);
        if (options_.after_series_put) {
            options_.after_series_put(project->project_id);
        }
        store_.transition(project->project_id, store::ProjectState::tracked,
                          {.last_analyzed_at = snapshot.fetched_at, .failure_reason = std::nullopt},
                          project->state);
        store_.documents().remove(key(kJobs, job.project_id));
        spdlog::info("{} {}/{}#{}: published ({} commits, {} issues)", to_string(job.kind), project->owner,
                     project->name, project->branch, snapshot.commit_count, snapshot.issues.size());
        return Outcome::published;
    } catch (...) {
        error = std::current_exception();
    }

    const auto failure = classify(error);
    if (failure.retryable && job.attempt < options_.max_attempts) {
        Job next = job;
        next.attempt = job.attempt + 1;
        next.not_before = store_.clock().now() + backoff_delay(options_, next.attempt);
        next.last_error = failure.reason;
        write_job(next);
        spdlog::warn("{}/{}#{}: attempt {} failed, retrying at {}: {}", project->owner, project->name,
                     project->branch, job.attempt, format_rfc3339(next.not_before), failure.reason);
        return Outcome::retry_scheduled;
    }

    const auto reason = failure.reason + " (after " + std::to_string(job.attempt) + " attempt" +
                        (job.attempt == 1 ? "" : "s") + ")";
    try {
        if (project->state == store::ProjectState::pending) {
            store_.transition(project->project_id, store::ProjectState::failed,
                              {.last_analyzed_at = std::nullopt, .failure_reason = reason}, store::ProjectState::pending);
        } else {
            // A tracked project keeps serving its last good series.
            wire::Json marker = wire::Json::object();
            if (const auto text = store_.documents().get(key(kRefresh, project->project_id))) {
                marker = parse_doc(*text, "refresh marker");
            }
            marker["last_error"] = reason;
            store_.documents().put(key(kRefresh, project->project_id), wire::render(marker));
        }
    } catch (const store::StoreError& e) {
        spdlog::error("{}: cannot record failure: {}", project->project_id, e.what());
    }
    store_.documents().remove(key(kJobs, job.project_id));
    spdlog::error("{}/{}#{}: failed: {}", project->owner, project->name, project->branch, reason);
    return Outcome::failed;
}

std::size_t Worker::run_due() {
    const auto now = store_.clock().now();
    std::vector<Job> due;
    for (auto& job : live_jobs()) {
        if (job.not_before <= now) {
            due.push_back(std::move(job));
        }
    }
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> ran{0};
    auto loop = [&] {
        for (auto i = next++; i < due.size(); i = next++) {
            try {
                if (run_job(due[i])) {
                    ++ran;
                }
            } catch (const std::exception& e) {
                spdlog::error("{}: job aborted: {}", due[i].project_id, e.what());
            }
        }
    };
    const auto threads = std::min<std::size_t>(pool_size(), due.size());
    if (threads <= 1) {
        loop();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(loop);
        }
    }
    return ran;
}

std::size_t Worker::drain() {
    std::size_t total = 0;
    enqueue_pending();
    schedule_refresh();
    for (;;) {
        total += run_due();
        const auto jobs = live_jobs();
        if (jobs.empty()) {
            return total;
        }
        const auto now = store_.clock().now();
        auto wake = std::min_element(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
                        return a.not_before < b.not_before;
                    })->not_before;
        // Due jobs that were skipped are held elsewhere; poll for them.
        store_.clock().sleep_for(wake > now ? wake - now : Millis{200});
    }
}

void Worker::run(std::stop_token stop, Millis poll) {
    while (!stop.stop_requested()) {
        try {
            enqueue_pending();
            schedule_refresh();
            run_due();
        } catch (const std::exception& e) {
            spdlog::error("worker cycle failed: {}", e.what());
        }
        for (auto left = poll; left > Millis{0} && !stop.stop_requested();) {
            const auto step = std::min(left, Millis{100});
            store_.clock().sleep_for(step);
            left -= step;
        }
    }
}

store::ProjectRecord Worker::veto(std::string_view project_id, const std::string& reason) {
    store::ProjectRecord out;
    store_.documents().exclusive([&] {
        out = store_.transition(project_id, store::ProjectState::failed,
                                {.last_analyzed_at = std::nullopt, .failure_reason = reason},
                                store::ProjectState::pending);
        store_.documents().remove(key(kJobs, project_id));
    });
    return out;
}

}  // namespace repopulse::worker
