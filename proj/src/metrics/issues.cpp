#include <algorithm>
#include <cmath>

#include "repopulse/metrics/metrics.hpp"

namespace repopulse::metrics {

std::vector<IssueCounts> issue_counts(std::span<const IssueRecord> issues, std::span<const TimeWindow> windows) {
    std::vector<Instant> opened;
    std::vector<Instant> closed;
    opened.reserve(issues.size());
    for (const auto& issue : issues) {
        if (issue.closed_at && *issue.closed_at < issue.opened_at) {
            throw MetricsError(MetricsErrc::invalid_argument, "issue " + issue.issue_id + " closes before it opens");
        }
        opened.push_back(issue.opened_at);
        if (issue.closed_at) {
            closed.push_back(*issue.closed_at);
        }
    }
    std::sort(opened.begin(), opened.end());
    std::sort(closed.begin(), closed.end());

    const auto count_before = [](const std::vector<Instant>& sorted, Instant t) {
        return static_cast<std::int64_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    };

    // closed_at >= opened_at, so every issue closed before t was also opened
    // before t and open_cumulative is a plain difference.
    std::vector<IssueCounts> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        const auto opened_before_end = count_before(opened, w.end);
        const auto closed_before_end = count_before(closed, w.end);
        out.push_back(IssueCounts{
            .opened = opened_before_end - count_before(opened, w.start),
            .closed = closed_before_end - count_before(closed, w.start),
            .open_cumulative = opened_before_end - closed_before_end,
            .closed_cumulative = closed_before_end,
        });
    }
    return out;
}

std::optional<double> density(std::int64_t open_cumulative, double kloc) {
    if (open_cumulative < 0 || !(kloc >= 0.0) || !std::isfinite(kloc)) {
        throw MetricsError(MetricsErrc::invalid_argument, "density needs a non-negative count and size");
    }
    if (kloc == 0.0) {
        return std::nullopt;
    }
    // A subnormal size can overflow the quotient; that is no measurable code either.
    const double rho = static_cast<double>(open_cumulative) / kloc;
    if (!std::isfinite(rho)) {
        return std::nullopt;
    }
    return rho;
}

double SpoilageStats::mean_age_days() const {
    if (open_count == 0) {
        return 0.0;
    }
    return static_cast<double>(total_age_ms) / static_cast<double>(open_count) / static_cast<double>(kMillisPerDay);
}

SpoilageStats spoilage_stats(std::span<const IssueRecord> issues, Instant at) {
    SpoilageStats stats;
    for (const auto& issue : issues) {
        if (issue.is_open_at(at)) {
            ++stats.open_count;
            stats.total_age_ms += (at - issue.opened_at).count();
        }
    }
    return stats;
}

double spoilage(std::span<const IssueRecord> issues, Instant at) { return spoilage_stats(issues, at).mean_age_days(); }

std::vector<double> spoilage_series(std::span<const IssueRecord> issues, std::span<const TimeWindow> windows) {
    std::vector<double> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        out.push_back(spoilage(issues, w.end));
    }
    return out;
}

}  // namespace repopulse::metrics
