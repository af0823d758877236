#pragma once

// JSON/CSV encoding of metric series. The API, the CLI and the store all go
// through these functions so their bytes agree.

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "repopulse/metrics/types.hpp"

namespace repopulse::wire {

using Json = nlohmann::ordered_json;

/// Which metric-specific field accompanies kloc and issues.
enum class MetricField { kloc, density, spoilage, all };

[[nodiscard]] std::string_view to_string(MetricField m);
/// Accepts kloc | density | spoilage, plus "all" when allow_all is set.
[[nodiscard]] std::optional<MetricField> parse_metric(std::string_view text, bool allow_all = false);

/// {start_date, end_date, kloc, issues{open, closed, openCumulative,
/// closedCumulative}} followed by density and/or spoilage as selected.
/// end_date is the window end minus one second.
[[nodiscard]] Json sample_to_json(const metrics::WindowSample& sample, MetricField metric);
[[nodiscard]] Json series_to_json(const metrics::MetricSeries& series, MetricField metric);

/// Canonical text form: two-space indentation, trailing newline.
[[nodiscard]] std::string render(const Json& value);
[[nodiscard]] std::string render_series(const metrics::MetricSeries& series, MetricField metric);

/// One header row in wire field order, one row per window.
[[nodiscard]] std::string render_series_csv(const metrics::MetricSeries& series, MetricField metric);

/// Inverse of sample_to_json(…, MetricField::all). Throws std::invalid_argument
/// on missing or mistyped fields.
[[nodiscard]] metrics::WindowSample sample_from_json(const Json& value);

/// Full-fidelity document used for persistence.
[[nodiscard]] Json series_document(const metrics::MetricSeries& series, std::string_view project_id);
[[nodiscard]] metrics::MetricSeries series_from_document(const Json& doc);

}  // namespace repopulse::wire
