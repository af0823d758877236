#include "repopulse/wire/wire.hpp"

#include <sstream>
#include <stdexcept>

namespace repopulse::wire {

namespace {

constexpr Millis kLabelOffset{1000};

const Json& field(const Json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name)) {
        throw std::invalid_argument(std::string("missing field: ") + name);
    }
    return obj.at(name);
}

std::int64_t integer_field(const Json& obj, const char* name) {
    const auto& v = field(obj, name);
    if (!v.is_number_integer()) {
        throw std::invalid_argument(std::string("field is not an integer: ") + name);
    }
    return v.get<std::int64_t>();
}

double number_field(const Json& obj, const char* name) {
    const auto& v = field(obj, name);
    if (!v.is_number()) {
        throw std::invalid_argument(std::string("field is not a number: ") + name);
    }
    return v.get<double>();
}

std::string string_field(const Json& obj, const char* name) {
    const auto& v = field(obj, name);
    if (!v.is_string()) {
        throw std::invalid_argument(std::string("field is not a string: ") + name);
    }
    return v.get<std::string>();
}

std::string number_text(double v) { return Json(v).dump(); }

}  // namespace

std::string_view to_string(MetricField m) {
    switch (m) {
        case MetricField::kloc:
            return "kloc";
        case MetricField::density:
            return "density";
        case MetricField::spoilage:
            return "spoilage";
        case MetricField::all:
            return "all";
    }
    return "kloc";
}

std::optional<MetricField> parse_metric(std::string_view text, bool allow_all) {
    if (text == "kloc") {
        return MetricField::kloc;
    }
    if (text == "density") {
        return MetricField::density;
    }
    if (text == "spoilage") {
        return MetricField::spoilage;
    }
    if (allow_all && text == "all") {
        return MetricField::all;
    }
    return std::nullopt;
}

Json sample_to_json(const metrics::WindowSample& s, MetricField metric) {
    Json out;
    out["start_date"] = format_rfc3339(s.window.start);
    out["end_date"] = format_rfc3339(s.window.end - kLabelOffset);
    out["kloc"] = s.kloc;
    Json issues;
    issues["open"] = s.issues_open;
    issues["closed"] = s.issues_closed;
    issues["openCumulative"] = s.open_cumulative;
    issues["closedCumulative"] = s.closed_cumulative;
    out["issues"] = std::move(issues);
    if (metric == MetricField::density || metric == MetricField::all) {
        out["density"] = s.density ? Json(*s.density) : Json(nullptr);
    }
    if (metric == MetricField::spoilage || metric == MetricField::all) {
        out["spoilage"] = s.spoilage;
    }
    return out;
}

Json series_to_json(const metrics::MetricSeries& series, MetricField metric) {
    Json out = Json::array();
    for (const auto& s : series.samples) {
        out.push_back(sample_to_json(s, metric));
    }
    return out;
}

std::string render(const Json& value) { return value.dump(2) + "\n"; }

std::string render_series(const metrics::MetricSeries& series, MetricField metric) {
    return render(series_to_json(series, metric));
}

std::string render_series_csv(const metrics::MetricSeries& series, MetricField metric) {
    const bool with_density = metric == MetricField::density || metric == MetricField::all;
    const bool with_spoilage = metric == MetricField::spoilage || metric == MetricField::all;
    std::ostringstream out;
    out << "start_date,end_date,kloc,open,closed,openCumulative,closedCumulative";
    if (with_density) {
        out << ",density";
    }
    if (with_spoilage) {
        out << ",spoilage";
    }
    out << '\n';
    for (const auto& s : series.samples) {
        out << format_rfc3339(s.window.start) << ',' << format_rfc3339(s.window.end - kLabelOffset) << ','
            << number_text(s.kloc) << ',' << s.issues_open << ',' << s.issues_closed << ',' << s.open_cumulative
            << ',' << s.closed_cumulative;
        if (with_density) {
            // Undefined density is an empty cell.
            out << ',' << (s.density ? number_text(*s.density) : std::string{});
        }
        if (with_spoilage) {
            out << ',' << number_text(s.spoilage);
        }
        out << '\n';
    }
    return out.str();
}

metrics::WindowSample sample_from_json(const Json& value) {
    metrics::WindowSample s;
    s.window.start = parse_rfc3339(string_field(value, "start_date"));
    s.window.end = parse_rfc3339(string_field(value, "end_date")) + kLabelOffset;
    s.kloc = number_field(value, "kloc");
    const auto& issues = field(value, "issues");
    s.issues_open = integer_field(issues, "open");
    s.issues_closed = integer_field(issues, "closed");
    s.open_cumulative = integer_field(issues, "openCumulative");
    s.closed_cumulative = integer_field(issues, "closedCumulative");
    const auto& density = field(value, "density");
    if (!density.is_null()) {
        s.density = number_field(value, "density");
    }
    s.spoilage = number_field(value, "spoilage");
    return s;
}

Json series_document(const metrics::MetricSeries& series, std::string_view project_id) {
    Json doc;
    doc["project_id"] = std::string(project_id);
    doc["granularity"] = std::string(metrics::to_string(series.granularity));
    doc["samples"] = series_to_json(series, MetricField::all);
    return doc;
}

metrics::MetricSeries series_from_document(const Json& doc) {
    metrics::MetricSeries series;
    const auto g = metrics::parse_granularity(string_field(doc, "granularity"));
    if (!g) {
        throw std::invalid_argument("unknown granularity in series document");
    }
    series.granularity = *g;
    const auto& samples = field(doc, "samples");
    if (!samples.is_array()) {
        throw std::invalid_argument("samples is not an array");
    }
    series.samples.reserve(samples.size());
    for (const auto& s : samples) {
        series.samples.push_back(sample_from_json(s));
    }
    return series;
}

}  // namespace repopulse::wire
