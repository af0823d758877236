#include "repopulse/ingest/issues.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "repopulse/ingest/errors.hpp"

namespace repopulse::ingest {

namespace {

using nlohmann::json;

std::optional<std::string> next_link(const HttpHeaders& headers) {
    const auto it = headers.find("Link");
    if (it == headers.end()) {
        return std::nullopt;
    }
    std::string_view link = it->second;
    std::size_t pos = 0;
    while (pos < link.size()) {
        const auto comma = link.find(',', pos);
        const auto part = link.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        const auto lt = part.find('<');
        const auto gt = part.find('>');
        if (lt != std::string_view::npos && gt != std::string_view::npos && gt > lt &&
            part.find("rel=\"next\"", gt) != std::string_view::npos) {
            return std::string(part.substr(lt + 1, gt - lt - 1));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return std::nullopt;
}

std::optional<std::int64_t> header_int(const HttpHeaders& headers, const char* name) {
    const auto it = headers.find(name);
    if (it == headers.end()) {
        return std::nullopt;
    }
    std::int64_t v = 0;
    const auto& s = it->second;
    if (std::from_chars(s.data(), s.data() + s.size(), v).ec != std::errc{}) {
        return std::nullopt;
    }
    return v;
}

Instant parse_time_field(const json& item, const char* field) {
    try {
        return parse_rfc3339(item.at(field).get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw IngestError(IngestErrc::malformed_payload, std::string(field) + ": " + e.what());
    }
}

std::string id_text(const json& v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<std::int64_t>());
    }
    throw IngestError(IngestErrc::malformed_payload, "issue id must be a string or integer");
}

void sort_issues(std::vector<metrics::IssueRecord>& issues) {
    std::sort(issues.begin(), issues.end(), [](const auto& a, const auto& b) {
        return std::tie(a.opened_at, a.issue_id) < std::tie(b.opened_at, b.issue_id);
    });
}

}  // namespace

void validate_issues(const std::vector<metrics::IssueRecord>& issues) {
    std::set<std::string_view> ids;
    for (const auto& i : issues) {
        if (!ids.insert(i.issue_id).second) {
            throw IngestError(IngestErrc::malformed_payload, "duplicate issue id " + i.issue_id);
        }
        if (i.closed_at && *i.closed_at < i.opened_at) {
            throw IngestError(IngestErrc::malformed_payload, "issue " + i.issue_id + " closed before it was opened");
        }
    }
}

FetchedIssues fetch_issues(const RepoSource& source, HttpClient& http, Clock& clock, const GitHubOptions& options,
                           std::optional<Instant> updated_since) {
    if (!source.slug) {
        throw IngestError(IngestErrc::invalid_source, "issue fetch needs owner/name");
    }
    std::string url = options.api_base + "/repos/" + source.slug->owner + "/" + source.slug->name +
                      "/issues?state=all&per_page=100";
    if (updated_since) {
        url += "&since=" + format_rfc3339(*updated_since);
    }

    std::map<std::string, metrics::IssueRecord> by_id;
    FetchedIssues out;
    int waits = 0;
    while (true) {
        HttpRequest request;
        request.url = url;
        request.headers["Accept"] = "application/vnd.github+json";
        request.headers["User-Agent"] = "repopulse";
        if (options.token && !options.token->empty()) {
            request.headers["Authorization"] = "Bearer " + *options.token;
        }
        const auto response = http.send(request);

        if (response.status == 403 || response.status == 429) {
            const auto remaining = header_int(response.headers, "X-RateLimit-Remaining");
            const auto retry_after = header_int(response.headers, "Retry-After");
            const auto reset = header_int(response.headers, "X-RateLimit-Reset");
            const bool limited = response.status == 429 || retry_after || (remaining && *remaining == 0);
            if (limited) {
                Millis wait{-1};
                if (retry_after) {
                    wait = Millis{*retry_after * kMillisPerSecond};
                } else if (reset) {
                    wait = std::max(Millis{0}, from_epoch_ms(*reset * kMillisPerSecond) - clock.now());
                }
                if (wait < Millis{0}) {
                    throw IngestError(IngestErrc::rate_limited, "rate limit exhausted without reset information");
                }
                if (++waits > options.max_rate_limit_waits) {
                    throw IngestError(IngestErrc::rate_limited, "rate limit still exhausted after waiting");
                }
                clock.sleep_for(wait);
                continue;
            }
            throw IngestError(IngestErrc::authentication_failed, "access forbidden (403)");
        }
        if (response.status == 401) {
            throw IngestError(IngestErrc::authentication_failed, "authentication failed (401)");
        }
        if (response.status == 404) {
            throw IngestError(IngestErrc::remote_repository_not_found,
                              "repository " + source.slug->owner + "/" + source.slug->name + " not found");
        }
        if (response.status == 410) {
            // Issues disabled on the repository.
            return {};
        }
        if (response.status >= 500) {
            throw IngestError(IngestErrc::network, "server error " + std::to_string(response.status));
        }
        if (response.status != 200) {
            throw IngestError(IngestErrc::malformed_payload, "unexpected status " + std::to_string(response.status));
        }
        waits = 0;

        json page;
        try {
            page = json::parse(response.body);
        } catch (const json::parse_error& e) {
            throw IngestError(IngestErrc::malformed_payload, std::string("issue page is not JSON: ") + e.what());
        }
        if (!page.is_array()) {
            throw IngestError(IngestErrc::malformed_payload, "issue page is not an array");
        }
        try {
            for (const auto& item : page) {
                if (!item.is_object()) {
                    throw IngestError(IngestErrc::malformed_payload, "issue entry is not an object");
                }
                if (item.contains("pull_request")) {
                    continue;
                }
                metrics::IssueRecord rec;
                rec.issue_id = id_text(item.contains("number") ? item.at("number") : item.at("id"));
                rec.opened_at = parse_time_field(item, "created_at");
                if (item.contains("closed_at") && !item.at("closed_at").is_null()) {
                    rec.closed_at = parse_time_field(item, "closed_at");
                }
                if (item.contains("updated_at") && item.at("updated_at").is_string()) {
                    const auto u = parse_time_field(item, "updated_at");
                    out.newest_update = out.newest_update ? std::max(*out.newest_update, u) : u;
                }
                by_id[rec.issue_id] = std::move(rec);
            }
        } catch (const json::exception& e) {
            throw IngestError(IngestErrc::malformed_payload, std::string("bad issue entry: ") + e.what());
        }

        const auto next = next_link(response.headers);
        if (!next) {
            break;
        }
        url = *next;
    }

    out.issues.reserve(by_id.size());
    for (auto& [id, rec] : by_id) {
        out.issues.push_back(std::move(rec));
    }
    sort_issues(out.issues);
    validate_issues(out.issues);
    return out;
}

std::vector<metrics::IssueRecord> parse_issues_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IngestError(IngestErrc::malformed_payload, std::string("issues file is not JSON: ") + e.what());
    }
    if (!doc.is_array()) {
        throw IngestError(IngestErrc::malformed_payload, "issues file must hold an array");
    }
    std::vector<metrics::IssueRecord> issues;
    issues.reserve(doc.size());
    try {
        for (const auto& item : doc) {
            metrics::IssueRecord rec;
            rec.issue_id = id_text(item.at("id"));
            rec.opened_at = parse_time_field(item, "opened_at");
            if (item.contains("closed_at") && !item.at("closed_at").is_null()) {
                rec.closed_at = parse_time_field(item, "closed_at");
            }
            issues.push_back(std::move(rec));
        }
    } catch (const json::exception& e) {
        throw IngestError(IngestErrc::malformed_payload, std::string("bad issues entry: ") + e.what());
    }
    validate_issues(issues);
    sort_issues(issues);
    return issues;
}

std::vector<metrics::IssueRecord> load_issues_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError(IngestErrc::fixture_missing, "cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_issues_json(buf.str());
}

std::string issues_to_json(const std::vector<metrics::IssueRecord>& issues) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& i : issues) {
        nlohmann::ordered_json item;
        item["id"] = i.issue_id;
        item["opened_at"] = format_rfc3339(i.opened_at);
        if (i.closed_at) {
            item["closed_at"] = format_rfc3339(*i.closed_at);
        }
        doc.push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

FetchedIssues GitHubIssueSource::fetch(const RepoSource& source, std::optional<Instant> updated_since) {
    return fetch_issues(source, *http_, clock_, options_, updated_since);
}

FetchedIssues FileIssueSource::fetch(const RepoSource&, std::optional<Instant>) {
    return {load_issues_json(path_), std::nullopt};
}

}  // namespace repopulse::ingest
