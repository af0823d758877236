#pragma once

// A store seeded with the Go tracker's weekly figures around the December
// 2014 mass closure.

#include "repopulse/metrics/metrics.hpp"
#include "repopulse/store/store.hpp"

namespace repopulse::fixtures {

inline metrics::WindowSample listing_sample(Instant start, Millis length, double kloc, std::int64_t open,
                                            std::int64_t closed, std::int64_t open_cum, std::int64_t closed_cum) {
    metrics::WindowSample s;
    s.window = {start, start + length};
    s.kloc = kloc;
    s.issues_open = open;
    s.issues_closed = closed;
    s.open_cumulative = open_cum;
    s.closed_cumulative = closed_cum;
    s.density = metrics::density(open_cum, kloc);
    s.spoilage = 0.0;
    return s;
}

inline metrics::MetricSeries go_listing_week() {
    const Millis week{7 * kMillisPerDay};
    metrics::MetricSeries series{.granularity = metrics::Granularity::week, .samples = {}};
    series.samples.push_back(listing_sample(make_instant(2014, 11, 24), week, 651.0461298714263, 30, 0, 9161, 0));
    series.samples.push_back(listing_sample(make_instant(2014, 12, 1), week, 653.9527515172911, 34, 0, 9195, 0));
    series.samples.push_back(
        listing_sample(make_instant(2014, 12, 8), week, 639.6212584045984, 120, 7968, 1347, 7968));
    return series;
}

inline metrics::MetricSeries go_listing_month() {
    metrics::MetricSeries series{.granularity = metrics::Granularity::month, .samples = {}};
    const auto nov = make_instant(2014, 11, 1);
    const auto dec = make_instant(2014, 12, 1);
    const auto jan = make_instant(2015, 1, 1);
    series.samples.push_back(listing_sample(nov, dec - nov, 650.5, 101, 0, 9161, 0));
    series.samples.push_back(listing_sample(dec, jan - dec, 641.25, 154, 7968, 1347, 7968));
    return series;
}

/// golang/go#master, tracked, with both series stored. Returns its id.
inline std::string seed_go_listing(store::Store& store) {
    const auto id = store.submit_request("golang", "go", "master").record.project_id;
    store.put_series({id, metrics::Granularity::week}, go_listing_week());
    store.put_series({id, metrics::Granularity::month}, go_listing_month());
    store.transition(id, store::ProjectState::tracked,
                     {.last_analyzed_at = make_instant(2015, 1, 1), .failure_reason = std::nullopt});
    return id;
}

}  // namespace repopulse::fixtures
