// Python bindings: one handle over a configured store, plus offline analyze.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>

#include "repopulse/api/service.hpp"
#include "repopulse/app/app.hpp"
#include "repopulse/ingest/errors.hpp"

namespace py = pybind11;

namespace {

using namespace repopulse;

using Settings = std::map<std::string, std::string>;

/// REPOPULSE_<KEY> resolves from `settings[key]` first, then the process
/// environment.
config::EnvLookup lookup_over(Settings settings) {
    return [settings = std::move(settings)](const std::string& name) -> std::optional<std::string> {
        constexpr std::string_view prefix = "REPOPULSE_";
        if (name.starts_with(prefix)) {
            auto key = name.substr(prefix.size());
            std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
            if (const auto it = settings.find(key); it != settings.end()) {
                return it->second;
            }
        }
        return config::process_env(name);
    };
}

class Instance {
public:
    Instance(const std::optional<std::string>& config_path, const Settings& settings)
        : config_(config::load(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt,
                               lookup_over(settings))),
          clock_(app::make_clock(config_)),
          store_(store::open_file_store(config_.store_path), *clock_),
          api_(store_, {.track_rate_limit_per_minute = config_.track_rate_limit_per_minute,
                        .default_per_page = 20,
                        .max_per_page = 100}) {}

    [[nodiscard]] std::string store_path() const { return config_.store_path.string(); }

    std::pair<std::string, bool> track(const std::string& owner, const std::string& name, const std::string& branch) {
        const auto r = store_.submit_request(owner, name, branch);
        return {wire::render(store::project_to_json(r.record)), r.created};
    }

    [[nodiscard]] std::vector<std::string> projects(const std::optional<std::string>& state) const {
        std::optional<store::ProjectState> filter;
        if (state) {
            filter = store::parse_state(*state);
            if (!filter) {
                throw py::value_error("unknown state: " + *state);
            }
        }
        std::vector<std::string> out;
        for (const auto& p : store_.list_projects(filter)) {
            out.push_back(store::project_to_json(p).dump());
        }
        return out;
    }

    [[nodiscard]] std::optional<std::string> project(const std::string& id) const {
        const auto p = store_.find_project(id);
        return p ? std::optional(wire::render(store::project_to_json(*p))) : std::nullopt;
    }

    [[nodiscard]] std::optional<std::string> series(const std::string& id, const std::string& group_by,
                                                    const std::string& metric) const {
        const auto g = metrics::parse_granularity(group_by);
        const auto m = wire::parse_metric(metric, true);
        if (!g || !m) {
            throw py::value_error("bad granularity or metric");
        }
        const auto s = store_.find_series({id, *g});
        return s ? std::optional(wire::render_series(*s, *m)) : std::nullopt;
    }

    std::string veto(const std::string& id, const std::string& reason) {
        return wire::render(store::project_to_json(make_worker().veto(id, reason)));
    }

    std::size_t work_once() {
        auto w = make_worker();
        py::gil_scoped_release release;
        return w.drain();
    }

    py::tuple handle(const std::string& method, const std::string& path, const Settings& query,
                     const std::string& body, const std::string& client) {
        const auto r = api_.handle({.method = method, .path = path, .query = query, .body = body, .client = client});
        Settings headers(r.headers.begin(), r.headers.end());
        return py::make_tuple(r.status, headers, r.body);
    }

private:
    worker::Worker make_worker() {
        return worker::Worker(store_, app::worker_options(config_), app::issue_sources(config_, *clock_));
    }

    config::Config config_;
    std::unique_ptr<Clock> clock_;
    store::Store store_;
    api::ApiService api_;
};

std::string analyze(const std::string& repo, const std::string& issues, const std::string& group_by,
                    const std::string& metric, const std::string& format, const std::optional<std::string>& now) {
    app::AnalyzeRequest request;
    request.repo = repo;
    request.issues = issues;
    const auto g = metrics::parse_granularity(group_by);
    const auto m = wire::parse_metric(metric, true);
    if (!g || !m || (format != "json" && format != "csv")) {
        throw py::value_error("group_by must be week or month, metric kloc, density, spoilage or all, format json or csv");
    }
    request.granularity = *g;
    request.metric = *m;
    request.format = format == "csv" ? app::OutputFormat::csv : app::OutputFormat::json;
    // A malformed timestamp raises std::invalid_argument, i.e. ValueError.
    const Instant at = now ? parse_rfc3339(*now) : SystemClock{}.now();
    py::gil_scoped_release release;
    return app::analyze(request, at);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "repopulse native core";
    spdlog::set_default_logger(spdlog::stderr_color_mt("repopulse"));

    // Base class only; the specific types below carry the translators.
    static py::exception<std::runtime_error> base(m, "Error");
    py::register_exception<config::ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<store::StoreError>(m, "StoreError", base.ptr());
    py::register_exception<ingest::IngestError>(m, "IngestError", base.ptr());
    py::register_exception<metrics::MetricsError>(m, "MetricsError", base.ptr());

    m.def("analyze", &analyze, py::arg("repo"), py::arg("issues"), py::arg("group_by"), py::arg("metric") = "all",
          py::arg("format") = "json", py::arg("now") = std::nullopt);

    py::class_<Instance>(m, "Instance")
        .def(py::init<const std::optional<std::string>&, const Settings&>(), py::arg("config_path") = std::nullopt,
             py::arg("settings") = Settings{})
        .def_property_readonly("store_path", &Instance::store_path)
        .def("track", &Instance::track)
        .def("projects", &Instance::projects, py::arg("state") = std::nullopt)
        .def("project", &Instance::project)
        .def("series", &Instance::series, py::arg("project_id"), py::arg("group_by"), py::arg("metric") = "all")
        .def("veto", &Instance::veto, py::arg("project_id"), py::arg("reason") = "rejected by operator")
        .def("work_once", &Instance::work_once)
        .def("handle", &Instance::handle, py::arg("method"), py::arg("path"), py::arg("query") = Settings{},
             py::arg("body") = "", py::arg("client") = "python");
}
