#include "repopulse/api/service.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <httplib.h>
#include <stdexcept>

namespace repopulse::api {

namespace {

using wire::Json;

constexpr Millis kRateWindow{60'000};
const std::vector<std::string_view> kMetrics = {"kloc", "density", "spoilage"};

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
        const auto j = path.find('/', i);
        const auto end = j == std::string::npos ? path.size() : j;
        if (end > i) {
            out.push_back(path.substr(i, end - i));
        }
        i = end + 1;
    }
    return out;
}

Response json_response(int status, const Json& body) {
    Response r;
    r.status = status;
    r.body = wire::render(body);
    return r;
}

std::optional<metrics::Granularity> frequency(const std::string& text) { return metrics::parse_granularity(text); }

Response bad_frequency(const std::string& text) {
    return error_response(400, "invalid_frequency", "frequency must be week or month, got '" + text + "'");
}

Response bad_metric(const std::string& text) {
    return error_response(400, "invalid_metric", "metric must be kloc, density or spoilage, got '" + text + "'");
}

std::optional<int> positive_int(const std::string& text) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v < 1) {
        return std::nullopt;
    }
    return v;
}

Json candidate(const store::ProjectRecord& p) {
    Json j;
    j["project_id"] = p.project_id;
    j["owner"] = p.owner;
    j["name"] = p.name;
    j["branch"] = p.branch;
    return j;
}

}  // namespace

std::optional<std::string> Response::header(const std::string& name) const {
    for (const auto& [k, v] : headers) {
        if (k.size() == name.size() && std::equal(k.begin(), k.end(), name.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
            })) {
            return v;
        }
    }
    return std::nullopt;
}

Response error_response(int status, const std::string& error, const std::string& detail) {
    Json body;
    body["error"] = error;
    body["detail"] = detail;
    return json_response(status, body);
}

ApiService::ApiService(store::Store& store, ApiOptions options) : store_(store), options_(options) {}

Response ApiService::handle(const Request& request) {
    Response r;
    try {
        const auto segments = split_path(request.path);
        const auto starts = [&](std::initializer_list<std::string_view> prefix) {
            if (segments.size() < prefix.size()) {
                return false;
            }
            std::size_t i = 0;
            for (const auto p : prefix) {
                if (segments[i++] != p) {
                    return false;
                }
            }
            return true;
        };
        const bool is_get = request.method == "GET" || request.method == "HEAD";

        if (request.method == "OPTIONS") {
            r.status = 204;
        } else if (starts({"metrics", "api"})) {
            r = is_get ? metric_series(segments, request) : error_response(405, "method_not_allowed", "use GET");
        } else if (starts({"dash", "public"})) {
            r = is_get ? dashboard(segments) : error_response(405, "method_not_allowed", "use GET");
        } else if (segments == std::vector<std::string>{"api", "projects"}) {
            r = is_get ? project_list(store::ProjectState::tracked, request)
                       : error_response(405, "method_not_allowed", "use GET");
        } else if (segments == std::vector<std::string>{"projects", "pending"}) {
            r = is_get ? project_list(store::ProjectState::pending, request)
                       : error_response(405, "method_not_allowed", "use GET");
        } else if (segments == std::vector<std::string>{"other", "requests", "track"}) {
            r = request.method == "POST" ? track(request) : error_response(405, "method_not_allowed", "use POST");
        } else {
            r = error_response(404, "not_found", "no route for " + request.path);
        }
    } catch (const store::StoreError& e) {
        r = error_response(e.code() == store::StoreErrc::not_found ? 404 : 500,
                           "store_" + std::string(store::to_string(e.code())), e.what());
    } catch (const std::exception& e) {
        r = error_response(500, "internal", e.what());
    }
    r.headers.emplace_back("Access-Control-Allow-Origin", "*");
    r.headers.emplace_back("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    r.headers.emplace_back("Access-Control-Allow-Headers", "Content-Type");
    r.headers.emplace_back("Access-Control-Expose-Headers", "X-Total-Count");
    return r;
}

Response ApiService::metric_series(const std::vector<std::string>& segments, const Request& request) const {
    // metrics/api/{metric}/{owner}/{name}/{branch...}
    if (segments.size() < 6) {
        return error_response(404, "not_found", "expected /metrics/api/{metric}/{owner}/{name}/{branch}");
    }
    const auto metric = wire::parse_metric(segments[2]);
    if (!metric) {
        return bad_metric(segments[2]);
    }
    const auto group = request.query.find("groupBy");
    if (group == request.query.end()) {
        return error_response(400, "invalid_frequency", "groupBy is required (week or month)");
    }
    const auto g = frequency(group->second);
    if (!g) {
        return bad_frequency(group->second);
    }
    std::string branch = segments[5];
    for (std::size_t i = 6; i < segments.size(); ++i) {
        branch += "/" + segments[i];
    }
    const auto project = store_.find_project(segments[3], segments[4], branch);
    if (!project || project->state != store::ProjectState::tracked) {
        return error_response(404, "project_not_found",
                              segments[3] + "/" + segments[4] + "#" + branch + " is not a tracked project");
    }
    const auto series = store_.find_series({project->project_id, *g});
    if (!series) {
        return error_response(404, "series_not_found", "no " + group->second + " series for " + project->project_id);
    }
    Response r;
    r.body = wire::render_series(*series, *metric);
    return r;
}

Response ApiService::dashboard(const std::vector<std::string>& segments) const {
    // dash/public/{frequency}/{project} or dash/public/{frequency}/{metric}/{project}
    if (segments.size() != 4 && segments.size() != 5) {
        return error_response(404, "not_found", "expected /dash/public/{frequency}[/{metric}]/{project}");
    }
    const auto g = frequency(segments[2]);
    if (!g) {
        return bad_frequency(segments[2]);
    }
    auto metric = wire::MetricField::all;
    if (segments.size() == 5) {
        const auto m = wire::parse_metric(segments[3]);
        if (!m) {
            return bad_metric(segments[3]);
        }
        metric = *m;
    }
    const auto& name = segments.back();
    std::vector<store::ProjectRecord> matches;
    for (auto& p : store_.list_projects(store::ProjectState::tracked)) {
        if (p.name == name) {
            matches.push_back(std::move(p));
        }
    }
    if (matches.empty()) {
        return error_response(404, "project_not_found", "no tracked project named '" + name + "'");
    }
    if (matches.size() > 1) {
        auto r = error_response(409, "ambiguous_project",
                                "several tracked projects are named '" + name + "'; use /metrics/api with the owner");
        Json body = Json::parse(r.body);
        body["candidates"] = Json::array();
        for (const auto& p : matches) {
            body["candidates"].push_back(candidate(p));
        }
        r.body = wire::render(body);
        return r;
    }
    const auto& project = matches.front();
    const auto series = store_.find_series({project.project_id, *g});
    if (!series) {
        return error_response(404, "series_not_found", "no " + segments[2] + " series for " + project.project_id);
    }
    Json body;
    body["project"] = candidate(project);
    body["frequency"] = segments[2];
    body["series"] = wire::series_to_json(*series, metric);
    body["available_metrics"] = Json::array();
    for (const auto m : kMetrics) {
        body["available_metrics"].push_back(m);
    }
    return json_response(200, body);
}

Response ApiService::project_list(store::ProjectState state, const Request& request) const {
    int page = 1;
    int per_page = options_.default_per_page;
    if (const auto it = request.query.find("page"); it != request.query.end()) {
        const auto v = positive_int(it->second);
        if (!v) {
            return error_response(400, "invalid_page", "page must be a positive integer");
        }
        page = *v;
    }
    if (const auto it = request.query.find("per_page"); it != request.query.end()) {
        const auto v = positive_int(it->second);
        if (!v || *v > options_.max_per_page) {
            return error_response(400, "invalid_per_page",
                                  "per_page must be between 1 and " + std::to_string(options_.max_per_page));
        }
        per_page = *v;
    }
    const auto all = store_.list_projects(state);
    Json body = Json::array();
    const auto first = static_cast<std::size_t>(page - 1) * static_cast<std::size_t>(per_page);
    for (std::size_t i = first; i < all.size() && i < first + static_cast<std::size_t>(per_page); ++i) {
        body.push_back(store::project_to_json(all[i]));
    }
    auto r = json_response(200, body);
    r.headers.emplace_back("X-Total-Count", std::to_string(all.size()));
    return r;
}

bool ApiService::allow_track(const std::string& client) {
    if (options_.track_rate_limit_per_minute <= 0) {
        return true;
    }
    const auto now = store_.clock().now();
    std::lock_guard lock(limiter_mutex_);
    auto& times = recent_[client];
    std::erase_if(times, [&](Instant t) { return now - t >= kRateWindow; });
    if (static_cast<int>(times.size()) >= options_.track_rate_limit_per_minute) {
        return false;
    }
    times.push_back(now);
    return true;
}

Response ApiService::track(const Request& request) {
    if (!allow_track(request.client)) {
        auto r = error_response(429, "rate_limited", "too many track requests; try again later");
        r.headers.emplace_back("Retry-After", "60");
        return r;
    }
    Json body;
    try {
        body = Json::parse(request.body);
    } catch (const Json::parse_error& e) {
        return error_response(400, "malformed_body", std::string("body is not JSON: ") + e.what());
    }
    if (!body.is_object()) {
        return error_response(400, "malformed_body", "body must be an object with owner, name and branch");
    }
    std::string fields[3];
    const char* names[3] = {"owner", "name", "branch"};
    for (int i = 0; i < 3; ++i) {
        const auto it = body.find(names[i]);
        if (it == body.end() || !it->is_string()) {
            return error_response(400, "malformed_body", std::string("missing string field '") + names[i] + "'");
        }
        fields[i] = it->get<std::string>();
    }
    try {
        const auto result = store_.submit_request(fields[0], fields[1], fields[2]);
        return json_response(result.created ? 202 : 200, store::project_to_json(result.record));
    } catch (const store::StoreError& e) {
        if (e.code() == store::StoreErrc::invalid_identifier) {
            return error_response(422, "invalid_identifier", e.what());
        }
        throw;
    }
}

std::pair<std::string, int> split_listen_addr(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon + 1 == addr.size()) {
        throw std::invalid_argument("listen address must be host:port, got '" + addr + "'");
    }
    auto host = addr.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
        host = host.substr(1, host.size() - 2);
    }
    const auto port_text = addr.substr(colon + 1);
    int port = -1;
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw std::invalid_argument("invalid port in listen address '" + addr + "'");
    }
    return {host.empty() ? "0.0.0.0" : host, port};
}

HttpServer::HttpServer(ApiService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        Request r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) {
            r.query.emplace(k, v);
        }
        r.body = req.body;
        r.client = req.remote_addr;
        const auto out = service_.handle(r);
        res.status = out.status;
        for (const auto& [k, v] : out.headers) {
            res.set_header(k, v);
        }
        if (out.status != 204) {
            res.set_content(out.body, "application/json");
        }
    };
    server_->Get(".*", handler);
    server_->Post(".*", handler);
    server_->Put(".*", handler);
    server_->Delete(".*", handler);
    server_->Patch(".*", handler);
    server_->Options(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& listen_addr) {
    const auto [host, port] = split_listen_addr(listen_addr);
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        throw std::runtime_error("cannot listen on " + listen_addr);
    }
    return bound;
}

void HttpServer::listen() { server_->listen_after_bind(); }

int HttpServer::start(const std::string& listen_addr) {
    const int port = bind(listen_addr);
    thread_ = std::thread([this] { listen(); });
    server_->wait_until_ready();
    return port;
}

void HttpServer::stop() {
    server_->stop();
    if (thread_.joinable()) {
        thread_.join();
    }
}

}  // namespace repopulse::api
