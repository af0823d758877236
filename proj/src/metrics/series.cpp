#include <algorithm>

#include "repopulse/metrics/metrics.hpp"

namespace repopulse::metrics {

MetricSeries build_series(std::span<const FileHistory> histories, std::span<const IssueRecord> issues,
                          const TimeWindow& range, Granularity granularity) {
    const auto windows = partition_range(range, granularity);
    const auto sizes = project_size_series(histories, windows);
    const auto counts = issue_counts(issues, windows);
    const auto ages = spoilage_series(issues, windows);

    MetricSeries series{granularity, {}};
    series.samples.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        series.samples.push_back(WindowSample{
            .window = windows[i],
            .kloc = sizes[i].value,
            .issues_open = counts[i].opened,
            .issues_closed = counts[i].closed,
            .open_cumulative = counts[i].open_cumulative,
            .closed_cumulative = counts[i].closed_cumulative,
            .density = density(counts[i].open_cumulative, sizes[i].value),
            .spoilage = ages[i],
        });
    }
    return series;
}

std::optional<TimeWindow> analysis_range(std::span<const FileHistory> histories,
                                         std::span<const IssueRecord> issues, Instant now) {
    std::optional<Instant> first;
    std::optional<Instant> last;
    const auto see = [&](Instant t) {
        first = first ? std::min(*first, t) : t;
        last = last ? std::max(*last, t) : t;
    };
    for (const auto& h : histories) {
        for (const auto& d : h.deltas) {
            see(d.timestamp);
        }
    }
    for (const auto& issue : issues) {
        see(issue.opened_at);
        if (issue.closed_at) {
            see(*issue.closed_at);
        }
    }
    if (!first) {
        return std::nullopt;
    }
    return TimeWindow{*first, std::max(now, *last + Millis{1})};
}

}  // namespace repopulse::metrics
