#include <unordered_set>

#include "repopulse/metrics/metrics.hpp"

namespace repopulse::metrics {

namespace {

void require_contiguous(std::span<const TimeWindow> windows) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!(windows[i].start < windows[i].end)) {
            throw MetricsError(MetricsErrc::invalid_windows, "empty window at index " + std::to_string(i));
        }
        if (i > 0 && windows[i - 1].end != windows[i].start) {
            throw MetricsError(MetricsErrc::invalid_windows,
                               "windows not contiguous at index " + std::to_string(i));
        }
    }
}

}  // namespace

std::vector<SizedWindow> file_size_series(const FileHistory& history, std::span<const TimeWindow> windows) {
    history.validate();
    require_contiguous(windows);

    std::vector<SizedWindow> out;
    out.reserve(windows.size());

    const auto& deltas = history.deltas;
    std::size_t next = 0;
    std::int64_t size = 0;

    for (const auto& w : windows) {
        while (next < deltas.size() && deltas[next].timestamp < w.start) {
            size += deltas[next++].delta_loc;
        }
        // Integrate the step function over [w.start, w.end), LOC x ms.
        double area = 0.0;
        Instant cursor = w.start;
        while (next < deltas.size() && deltas[next].timestamp < w.end) {
            const auto& d = deltas[next++];
            area += static_cast<double>(size) * static_cast<double>((d.timestamp - cursor).count());
            size += d.delta_loc;
            cursor = d.timestamp;
        }
        area += static_cast<double>(size) * static_cast<double>((w.end - cursor).count());
        out.push_back(SizedWindow{w, area / static_cast<double>(w.length().count())});
    }
    return out;
}

std::vector<SizedWindow> project_size_series(std::span<const FileHistory> histories,
                                             std::span<const TimeWindow> windows) {
    require_contiguous(windows);
    std::vector<SizedWindow> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        out.push_back(SizedWindow{w, 0.0});
    }

    std::unordered_set<std::string_view> seen;
    for (const auto& history : histories) {
        if (!seen.insert(history.file_path).second) {
            throw MetricsError(MetricsErrc::duplicate_file, "duplicate file history: " + history.file_path);
        }
        std::vector<SizedWindow> per_file;
        try {
            per_file = file_size_series(history, windows);
        } catch (const MetricsError& e) {
            throw MetricsError(e.code(), history.file_path + ": " + e.what());
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i].value += per_file[i].value;
        }
    }
    for (auto& sw : out) {
        sw.value /= 1000.0;
    }
    return out;
}

}  // namespace repopulse::metrics
