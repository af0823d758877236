#include "repopulse/app/app.hpp"

#include "repopulse/ingest/git_history.hpp"
#include "repopulse/ingest/http.hpp"
#include "repopulse/ingest/issues.hpp"
#include "repopulse/metrics/metrics.hpp"

namespace repopulse::app {

namespace {

bool is_github(const std::string& url_template) { return url_template.find("github.com") != std::string::npos; }

}  // namespace

std::unique_ptr<Clock> make_clock(const config::Config& config) {
    if (config.now) {
        return std::make_unique<ManualClock>(*config.now);
    }
    return std::make_unique<SystemClock>();
}

worker::WorkerOptions worker_options(const config::Config& config) {
    worker::WorkerOptions o;
    o.workdir = config.workdir;
    o.clone_url_template = config.clone_url_template;
    o.host_kind = is_github(config.clone_url_template) ? ingest::HostKind::github : ingest::HostKind::generic_git;
    o.worker_count = config.worker_count;
    o.max_attempts = config.max_attempts;
    o.backoff_base = config.backoff_base;
    o.backoff_factor = config.backoff_factor;
    o.refresh_interval = config.refresh_interval;
    return o;
}

worker::IssueSourceFactory issue_sources(const config::Config& config, Clock& clock) {
    if (config.issues_dir) {
        const auto dir = *config.issues_dir;
        return [dir](const store::ProjectRecord& p) -> std::shared_ptr<ingest::IssueSource> {
            return std::make_shared<ingest::FileIssueSource>(dir / p.owner / p.name / "issues.json");
        };
    }
    ingest::GitHubOptions gh;
    gh.api_base = config.api_base;
    gh.token = config.token();
    if (config.replay_dir) {
        const auto dir = *config.replay_dir;
        return [dir, gh, &clock](const store::ProjectRecord&) -> std::shared_ptr<ingest::IssueSource> {
            // A client per job: replay cursors are not shared across threads.
            return std::make_shared<ingest::GitHubIssueSource>(std::make_shared<ingest::ReplayHttpClient>(dir), clock, gh);
        };
    }
    if (is_github(config.clone_url_template)) {
        return [gh, &clock](const store::ProjectRecord&) -> std::shared_ptr<ingest::IssueSource> {
            return std::make_shared<ingest::GitHubIssueSource>(std::make_shared<ingest::HttplibClient>(), clock, gh);
        };
    }
    return [](const store::ProjectRecord&) -> std::shared_ptr<ingest::IssueSource> {
        return std::make_shared<ingest::NoIssueSource>();
    };
}

metrics::MetricSeries analyze_series(const AnalyzeRequest& request, Instant now) {
    const ingest::GitRepository repo(request.repo);
    const auto log = repo.has_commits() ? repo.extract(request.branch) : ingest::CommitLog{};
    const auto issues = ingest::load_issues_json(request.issues);
    const auto range = metrics::analysis_range(log.histories, issues, now);
    if (!range) {
        return {.granularity = request.granularity, .samples = {}};
    }
    return metrics::build_series(log.histories, issues, *range, request.granularity);
}

std::string analyze(const AnalyzeRequest& request, Instant now) {
    const auto series = analyze_series(request, now);
    return request.format == OutputFormat::csv ? wire::render_series_csv(series, request.metric)
                                               : wire::render_series(series, request.metric);
}

}  // namespace repopulse::app
