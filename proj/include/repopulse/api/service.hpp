#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "repopulse/store/store.hpp"

namespace httplib {
class Server;
}

namespace repopulse::api {

struct Request {
    std::string method = "GET";
    /// Decoded path, without the query string.
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    /// Remote address, for rate limiting.
    std::string client = "local";
};

struct Response {
    int status = 200;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;

    [[nodiscard]] std::optional<std::string> header(const std::string& name) const;
};

struct ApiOptions {
    /// Track requests allowed per client per minute; 0 disables the limit.
    int track_rate_limit_per_minute = 30;
    int default_per_page = 20;
    int max_per_page = 100;
};

/// The route table as a pure function of the request and the store. Read
/// routes never ingest or compute; they render what the store holds.
class ApiService {
public:
    ApiService(store::Store& store, ApiOptions options = {});

    [[nodiscard]] Response handle(const Request& request);

private:
    Response metric_series(const std::vector<std::string>& segments, const Request& request) const;
    Response dashboard(const std::vector<std::string>& segments) const;
    Response project_list(store::ProjectState state, const Request& request) const;
    Response track(const Request& request);
    bool allow_track(const std::string& client);

    store::Store& store_;
    ApiOptions options_;
    std::mutex limiter_mutex_;
    std::map<std::string, std::vector<Instant>> recent_;
};

/// JSON error body {error, detail}.
[[nodiscard]] Response error_response(int status, const std::string& error, const std::string& detail);

/// Serves an ApiService over HTTP/1.1.
class HttpServer {
public:
    explicit HttpServer(ApiService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds "host:port" (port 0 picks a free one) and returns the bound port.
    int bind(const std::string& listen_addr);
    /// Blocks until stop().
    void listen();
    /// bind + listen on a background thread.
    int start(const std::string& listen_addr);
    void stop();

private:
    ApiService& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

/// Splits "host:port"; throws std::invalid_argument.
[[nodiscard]] std::pair<std::string, int> split_listen_addr(const std::string& addr);

}  // namespace repopulse::api
