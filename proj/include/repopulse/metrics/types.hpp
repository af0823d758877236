#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "repopulse/common/time.hpp"

namespace repopulse::metrics {

enum class MetricsErrc {
    invalid_range,
    invalid_windows,
    unsorted_history,
    negative_size,
    duplicate_file,
    incomplete_series,
    invalid_argument,
};

class MetricsError : public std::runtime_error {
public:
    MetricsError(MetricsErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] MetricsErrc code() const noexcept { return code_; }

private:
    MetricsErrc code_;
};

/// One commit's signed line-count change to one file.
struct CommitDelta {
    std::string file_path;
    Instant timestamp;
    std::int64_t delta_loc = 0;

    bool operator==(const CommitDelta&) const = default;
};

/// Time-ordered deltas of a single file. Prefix sums of delta_loc are the
/// file's size after each commit and must never go negative.
struct FileHistory {
    std::string file_path;
    std::vector<CommitDelta> deltas;

    bool operator==(const FileHistory&) const = default;

    /// Throws MetricsError (unsorted_history / negative_size) when the
    /// history breaks its invariants.
    void validate() const;
    [[nodiscard]] std::int64_t final_size() const;
};

/// Half-open [start, end).
struct TimeWindow {
    Instant start;
    Instant end;

    bool operator==(const TimeWindow&) const = default;

    [[nodiscard]] Millis length() const { return end - start; }
    [[nodiscard]] bool contains(Instant t) const { return start <= t && t < end; }
};

enum class Granularity { week, month };

[[nodiscard]] std::string_view to_string(Granularity g);
/// Accepts "week" or "month"; anything else yields nullopt.
[[nodiscard]] std::optional<Granularity> parse_granularity(std::string_view text);

struct IssueRecord {
    std::string issue_id;
    Instant opened_at;
    std::optional<Instant> closed_at;

    bool operator==(const IssueRecord&) const = default;

    [[nodiscard]] bool is_open_at(Instant at) const {
        return opened_at <= at && (!closed_at || *closed_at > at);
    }
};

struct EffortRecord {
    TimeWindow window;
    double person_hours = 0.0;
    bool estimated = false;
};

/// Author identity and commit time, used only for effort estimation.
struct CommitActivity {
    std::string author;
    Instant timestamp;

    bool operator==(const CommitActivity&) const = default;
};

struct WindowSample {
    TimeWindow window;
    double kloc = 0.0;
    std::int64_t issues_open = 0;
    std::int64_t issues_closed = 0;
    std::int64_t open_cumulative = 0;
    std::int64_t closed_cumulative = 0;
    /// Empty when the window has no measurable code.
    std::optional<double> density;
    double spoilage = 0.0;

    bool operator==(const WindowSample&) const = default;
};

struct MetricSeries {
    Granularity granularity = Granularity::week;
    std::vector<WindowSample> samples;

    bool operator==(const MetricSeries&) const = default;

    /// Throws MetricsError(invalid_windows) unless windows are contiguous.
    void validate() const;
};

}  // namespace repopulse::metrics
