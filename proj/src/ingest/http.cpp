#include "repopulse/ingest/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "repopulse/ingest/errors.hpp"

namespace repopulse::ingest {

bool CaseInsensitiveLess::operator()(std::string_view a, std::string_view b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](unsigned char x, unsigned char y) {
        return std::tolower(x) < std::tolower(y);
    });
}

ParsedUrl parse_url(std::string_view url) {
    const auto sep = url.find("://");
    if (sep == std::string_view::npos || sep == 0) {
        throw IngestError(IngestErrc::invalid_source, "not an absolute url: " + std::string(url));
    }
    ParsedUrl out;
    out.scheme = std::string(url.substr(0, sep));
    auto rest = url.substr(sep + 3);
    const auto slash = rest.find_first_of("/?");
    out.host_port = std::string(rest.substr(0, slash));
    if (out.host_port.empty()) {
        throw IngestError(IngestErrc::invalid_source, "url without host: " + std::string(url));
    }
    rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
    const auto q = rest.find('?');
    out.path = std::string(rest.substr(0, q));
    if (out.path.empty()) {
        out.path = "/";
    }
    if (q != std::string_view::npos) {
        out.query = std::string(rest.substr(q + 1));
    }
    return out;
}

std::string canonical_query(std::string_view query) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= query.size()) {
        const auto amp = query.find('&', start);
        auto part = query.substr(start, amp == std::string_view::npos ? std::string_view::npos : amp - start);
        if (!part.empty()) {
            parts.emplace_back(part);
        }
        if (amp == std::string_view::npos) {
            break;
        }
        start = amp + 1;
    }
    std::stable_sort(parts.begin(), parts.end(), [](const std::string& a, const std::string& b) {
        return a.substr(0, a.find('=')) < b.substr(0, b.find('='));
    });
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) {
            out += '&';
        }
        out += p;
    }
    return out;
}

HttpResponse HttplibClient::send(const HttpRequest& request) {
    const auto url = parse_url(request.url);
    httplib::Client client(url.scheme + "://" + url.host_port);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);
    client.set_follow_location(true);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) {
        headers.emplace(k, v);
    }
    httplib::Request req;
    req.method = request.method;
    req.path = url.query.empty() ? url.path : url.path + "?" + url.query;
    req.headers = std::move(headers);
    const auto result = client.send(req);
    if (!result) {
        throw IngestError(IngestErrc::network,
                          "request to " + url.host_port + " failed: " + httplib::to_string(result.error()));
    }
    HttpResponse response;
    response.status = result->status;
    response.body = result->body;
    for (const auto& [k, v] : result->headers) {
        response.headers[k] = v;
    }
    return response;
}

namespace {

std::string replay_key(std::string_view method, std::string_view path, std::string_view query) {
    return std::string(method) + " " + std::string(path) + "?" + canonical_query(query);
}

}  // namespace

ReplayHttpClient::ReplayHttpClient(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw IngestError(IngestErrc::fixture_missing, "no replay directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
            const auto& req = doc.at("request");
            const auto& res = doc.at("response");
            HttpResponse response;
            response.status = res.at("status").get<int>();
            if (res.contains("headers")) {
                for (const auto& [k, v] : res.at("headers").items()) {
                    response.headers[k] = v.is_string() ? v.get<std::string>() : v.dump();
                }
            }
            if (res.contains("body")) {
                const auto& body = res.at("body");
                response.body = body.is_string() ? body.get<std::string>() : body.dump();
            }
            const auto key = replay_key(req.value("method", "GET"), req.at("path").get<std::string>(),
                                        req.value("query", std::string{}));
            entries_[key].responses.push_back(std::move(response));
        } catch (const nlohmann::json::exception& e) {
            throw IngestError(IngestErrc::malformed_payload,
                              "bad replay file " + file.filename().string() + ": " + e.what());
        }
    }
}

HttpResponse ReplayHttpClient::send(const HttpRequest& request) {
    const auto url = parse_url(request.url);
    const auto key = replay_key(request.method, url.path, url.query);
    std::lock_guard lock(mutex_);
    seen_.push_back(request);
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw IngestError(IngestErrc::fixture_missing, "no recorded response for " + key);
    }
    auto& entry = it->second;
    const auto& response = entry.responses[std::min(entry.next, entry.responses.size() - 1)];
    ++entry.next;
    return response;
}

}  // namespace repopulse::ingest
