#include "repopulse/metrics/types.hpp"

namespace repopulse::metrics {

void FileHistory::validate() const {
    std::int64_t size = 0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (i > 0 && deltas[i].timestamp < deltas[i - 1].timestamp) {
            throw MetricsError(MetricsErrc::unsorted_history,
                               "history of " + file_path + " is not sorted at delta " + std::to_string(i));
        }
        size += deltas[i].delta_loc;
        if (size < 0) {
            throw MetricsError(MetricsErrc::negative_size, "history of " + file_path + " reaches size " +
                                                               std::to_string(size) + " at delta " +
                                                               std::to_string(i));
        }
    }
}

std::int64_t FileHistory::final_size() const {
    std::int64_t size = 0;
    for (const auto& d : deltas) {
        size += d.delta_loc;
    }
    return size;
}

std::string_view to_string(Granularity g) {
    switch (g) {
        case Granularity::week:
            return "week";
        case Granularity::month:
            return "month";
    }
    return "week";
}

std::optional<Granularity> parse_granularity(std::string_view text) {
    if (text == "week") {
        return Granularity::week;
    }
    if (text == "month") {
        return Granularity::month;
    }
    return std::nullopt;
}

void MetricSeries::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& w = samples[i].window;
        if (!(w.start < w.end)) {
            throw MetricsError(MetricsErrc::invalid_windows, "empty window at sample " + std::to_string(i));
        }
        if (i + 1 < samples.size() && samples[i + 1].window.start != w.end) {
            throw MetricsError(MetricsErrc::invalid_windows,
                               "windows not contiguous after sample " + std::to_string(i));
        }
    }
}

}  // namespace repopulse::metrics
