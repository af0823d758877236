#pragma once

// Pure computation kernel: calendar partitioning, time-weighted code size,
// issue counts, density, spoilage, productivity and daily downsampling.
// Nothing in here touches the clock, the filesystem or the network.

#include <chrono>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "repopulse/metrics/types.hpp"

namespace repopulse::metrics {

/// Splits [range.start, range.end) into calendar-aligned windows: ISO weeks
/// starting Monday 00:00 UTC, or calendar months starting on the 1st. The first
/// window contains range.start, the last contains range.end - 1ms.
[[nodiscard]] std::vector<TimeWindow> partition_range(const TimeWindow& range, Granularity granularity);

struct SizedWindow {
    TimeWindow window;
    double value = 0.0;

    bool operator==(const SizedWindow&) const = default;
};

/// Time-weighted mean size (LOC) of one file over each window. Commits at the
/// same instant apply in list order; a commit exactly at a window start counts
/// toward that window.
[[nodiscard]] std::vector<SizedWindow> file_size_series(const FileHistory& history,
                                                        std::span<const TimeWindow> windows);

/// Sum of per-file weighted sizes, in KLOC.
[[nodiscard]] std::vector<SizedWindow> project_size_series(std::span<const FileHistory> histories,
                                                           std::span<const TimeWindow> windows);

struct IssueCounts {
    std::int64_t opened = 0;
    std::int64_t closed = 0;
    std::int64_t open_cumulative = 0;
    std::int64_t closed_cumulative = 0;

    bool operator==(const IssueCounts&) const = default;
};

[[nodiscard]] std::vector<IssueCounts> issue_counts(std::span<const IssueRecord> issues,
                                                    std::span<const TimeWindow> windows);

/// Open issues per KLOC; nullopt when kloc == 0 (no measurable code) or so
/// small that the quotient overflows.
[[nodiscard]] std::optional<double> density(std::int64_t open_cumulative, double kloc);

struct SpoilageStats {
    std::int64_t open_count = 0;
    std::int64_t total_age_ms = 0;

    [[nodiscard]] double mean_age_days() const;
};

[[nodiscard]] SpoilageStats spoilage_stats(std::span<const IssueRecord> issues, Instant at);

/// Mean age in days of the issues open at `at`; 0 when none are open.
[[nodiscard]] double spoilage(std::span<const IssueRecord> issues, Instant at);

/// Spoilage evaluated at each window's end.
[[nodiscard]] std::vector<double> spoilage_series(std::span<const IssueRecord> issues,
                                                  std::span<const TimeWindow> windows);

/// LOC per person-hour; nullopt when no effort was recorded.
[[nodiscard]] std::optional<double> productivity(double size_kloc, const EffortRecord& effort);

/// Distinct (author, UTC day) pairs in the window times hours_per_day.
[[nodiscard]] EffortRecord estimate_effort(std::span<const CommitActivity> activity, const TimeWindow& window,
                                           double hours_per_day = 8.0);

using DailyValue = std::pair<std::chrono::sys_days, double>;

/// Mean of the daily values over the inclusive date range [first, last].
/// Throws MetricsError(incomplete_series) if any date in range is missing.
[[nodiscard]] double downsample(std::span<const DailyValue> daily, std::chrono::sys_days first,
                                std::chrono::sys_days last);

[[nodiscard]] MetricSeries build_series(std::span<const FileHistory> histories,
                                        std::span<const IssueRecord> issues, const TimeWindow& range,
                                        Granularity granularity);

/// [earliest commit or issue, max(now, latest event + 1ms)); nullopt when there
/// are no events at all.
[[nodiscard]] std::optional<TimeWindow> analysis_range(std::span<const FileHistory> histories,
                                                       std::span<const IssueRecord> issues, Instant now);

}  // namespace repopulse::metrics
