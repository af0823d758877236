#pragma once

// Wiring from a Config to the modules, shared by the command line tool and
// the Python bindings.

#include <filesystem>
#include <memory>
#include <string>

#include "repopulse/config/config.hpp"
#include "repopulse/store/store.hpp"
#include "repopulse/wire/wire.hpp"
#include "repopulse/worker/worker.hpp"

namespace repopulse::app {

/// A pinned clock when config.now is set, else the system clock.
[[nodiscard]] std::unique_ptr<Clock> make_clock(const config::Config& config);

[[nodiscard]] worker::WorkerOptions worker_options(const config::Config& config);

/// issues_dir, then replay_dir, then the live platform API for GitHub-hosted
/// sources; other hosts get no issues.
[[nodiscard]] worker::IssueSourceFactory issue_sources(const config::Config& config, Clock& clock);

enum class OutputFormat { json, csv };

struct AnalyzeRequest {
    std::filesystem::path repo;
    std::filesystem::path issues;
    metrics::Granularity granularity = metrics::Granularity::week;
    wire::MetricField metric = wire::MetricField::all;
    OutputFormat format = OutputFormat::json;
    /// Branch or commit to analyze; the checked-out head by default.
    std::string branch = "HEAD";
};

/// Local analysis without the service stack: history from the clone, issues
/// from the file, series over [first event, now].
[[nodiscard]] metrics::MetricSeries analyze_series(const AnalyzeRequest& request, Instant now);

/// analyze_series rendered exactly as the API would serve it (or as CSV).
[[nodiscard]] std::string analyze(const AnalyzeRequest& request, Instant now);

}  // namespace repopulse::app
