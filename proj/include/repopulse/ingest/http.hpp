#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace repopulse::ingest {

struct CaseInsensitiveLess {
    bool operator()(std::string_view a, std::string_view b) const;
    using is_transparent = void;
};

using HttpHeaders = std::map<std::string, std::string, CaseInsensitiveLess>;

struct HttpRequest {
    std::string method = "GET";
    std::string url;  // absolute
    HttpHeaders headers;
};

struct HttpResponse {
    int status = 0;
    HttpHeaders headers;
    std::string body;
};

/// Pieces of an absolute URL. `query` excludes the leading '?'.
struct ParsedUrl {
    std::string scheme;
    std::string host_port;
    std::string path;
    std::string query;
};

/// Throws IngestError(invalid_source) on anything that is not scheme://host/...
[[nodiscard]] ParsedUrl parse_url(std::string_view url);

/// Query string with parameters sorted by name, so equivalent requests
/// compare equal.
[[nodiscard]] std::string canonical_query(std::string_view query);

class HttpClient {
public:
    virtual ~HttpClient() = default;
    /// Transport failures throw IngestError(network); any HTTP status is a
    /// normal return.
    [[nodiscard]] virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// Live client over cpp-httplib (HTTPS through OpenSSL).
class HttplibClient final : public HttpClient {
public:
    explicit HttplibClient(int timeout_seconds = 30) : timeout_seconds_(timeout_seconds) {}
    [[nodiscard]] HttpResponse send(const HttpRequest& request) override;

private:
    int timeout_seconds_;
};

/// Serves recorded exchanges from a directory of JSON files, each
///   {"request":{"method","path","query"},"response":{"status","headers","body"}}
/// Files are matched on method, path and canonical query. Several files for
/// the same request are served in filename order; the last one repeats.
/// Unmatched requests throw IngestError(fixture_missing).
class ReplayHttpClient final : public HttpClient {
public:
    explicit ReplayHttpClient(const std::filesystem::path& dir);
    [[nodiscard]] HttpResponse send(const HttpRequest& request) override;

    [[nodiscard]] const std::vector<HttpRequest>& requests() const { return seen_; }

private:
    struct Entry {
        std::vector<HttpResponse> responses;
        std::size_t next = 0;
    };
    std::map<std::string, Entry> entries_;
    std::vector<HttpRequest> seen_;
    std::mutex mutex_;
};

}  // namespace repopulse::ingest
