#include "repopulse/metrics/metrics.hpp"

namespace repopulse::metrics {

namespace {

using namespace std::chrono;

sys_days align_down(sys_days day, Granularity g) {
    if (g == Granularity::week) {
        // iso_encoding: Monday = 1 ... Sunday = 7
        const unsigned iso = weekday{day}.iso_encoding();
        return day - days{iso - 1};
    }
    const year_month_day ymd{day};
    return sys_days{ymd.year() / ymd.month() / 1};
}

sys_days next_start(sys_days start, Granularity g) {
    if (g == Granularity::week) {
        return start + days{7};
    }
    const year_month_day ymd{start};
    return sys_days{(ymd.year() / ymd.month() / 1) + months{1}};
}

}  // namespace

std::vector<TimeWindow> partition_range(const TimeWindow& range, Granularity granularity) {
    if (!(range.start < range.end)) {
        throw MetricsError(MetricsErrc::invalid_range, "range start must precede range end");
    }
    std::vector<TimeWindow> windows;
    auto start = align_down(floor<days>(range.start), granularity);
    while (Instant{start} < range.end) {
        const auto next = next_start(start, granularity);
        windows.push_back(TimeWindow{Instant{start}, Instant{next}});
        start = next;
    }
    return windows;
}

}  // namespace repopulse::metrics
