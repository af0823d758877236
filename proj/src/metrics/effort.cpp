#include <cmath>
#include <map>
#include <set>

#include "repopulse/metrics/metrics.hpp"

namespace repopulse::metrics {

std::optional<double> productivity(double size_kloc, const EffortRecord& effort) {
    if (!(size_kloc >= 0.0) || !(effort.person_hours >= 0.0) || !std::isfinite(size_kloc) ||
        !std::isfinite(effort.person_hours)) {
        throw MetricsError(MetricsErrc::invalid_argument, "productivity needs non-negative size and effort");
    }
    if (effort.person_hours == 0.0) {
        return std::nullopt;
    }
    return size_kloc * 1000.0 / effort.person_hours;
}

EffortRecord estimate_effort(std::span<const CommitActivity> activity, const TimeWindow& window,
                             double hours_per_day) {
    if (!(hours_per_day > 0.0)) {
        throw MetricsError(MetricsErrc::invalid_argument, "hours_per_day must be positive");
    }
    std::set<std::pair<std::string_view, std::int64_t>> committer_days;
    for (const auto& a : activity) {
        if (window.contains(a.timestamp)) {
            const auto day = std::chrono::floor<std::chrono::days>(a.timestamp).time_since_epoch().count();
            committer_days.emplace(a.author, day);
        }
    }
    return EffortRecord{window, static_cast<double>(committer_days.size()) * hours_per_day, true};
}

double downsample(std::span<const DailyValue> daily, std::chrono::sys_days first, std::chrono::sys_days last) {
    if (last < first) {
        throw MetricsError(MetricsErrc::invalid_range, "downsample range is inverted");
    }
    std::map<std::chrono::sys_days, double> by_date;
    for (const auto& [date, value] : daily) {
        if (!by_date.emplace(date, value).second) {
            throw MetricsError(MetricsErrc::invalid_argument, "duplicate date in daily series");
        }
    }
    auto it = by_date.find(first);
    if (it == by_date.end()) {
        throw MetricsError(MetricsErrc::incomplete_series, "daily series has no value for the first date");
    }
    // Mean of deviations from the first value: exact for constant series.
    const double anchor = it->second;
    double deviation = 0.0;
    std::int64_t count = 0;
    for (auto d = first; d <= last; d += std::chrono::days{1}) {
        if (it == by_date.end() || it->first != d) {
            throw MetricsError(MetricsErrc::incomplete_series,
                               "daily series is missing day " + std::to_string(d.time_since_epoch().count()));
        }
        deviation += it->second - anchor;
        ++count;
        ++it;
    }
    return anchor + deviation / static_cast<double>(count);
}

}  // namespace repopulse::metrics
