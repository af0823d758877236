#pragma once

// Writes recorded issue-API exchanges in the replay directory format.

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "repopulse/common/time.hpp"
#include "repopulse/metrics/types.hpp"
#include "support/git_fixture.hpp"

namespace repopulse::fixtures {

using nlohmann::json;

struct RecordedPage {
    std::string path;
    std::string query;
    int status = 200;
    json headers = json::object();
    json body = json::array();
};

inline void write_replay(const fs::path& dir, const std::vector<RecordedPage>& pages) {
    fs::create_directories(dir);
    int n = 0;
    for (const auto& p : pages) {
        json doc{{"request", {{"method", "GET"}, {"path", p.path}, {"query", p.query}}},
                 {"response",
                  {{"status", p.status},
                   {"headers", p.headers.is_null() ? json::object() : p.headers},
                   {"body", p.body.is_null() ? json::array() : p.body}}}};
        char name[32];
        std::snprintf(name, sizeof name, "%03d.json", n++);
        write_file(dir / name, doc.dump(2));
    }
}

inline json issue_json(int number, Instant opened, std::optional<Instant> closed, bool pull_request = false) {
    json item{{"number", number},
              {"id", 1'000'000 + number},
              {"created_at", format_rfc3339(opened)},
              {"updated_at", format_rfc3339(closed.value_or(opened))},
              {"closed_at", closed ? json(format_rfc3339(*closed)) : json(nullptr)},
              {"state", closed ? "closed" : "open"}};
    if (pull_request) {
        item["pull_request"] = {{"url", "https://api.example.test/pulls/" + std::to_string(number)}};
    }
    return item;
}

/// Three full pages of 100 issues each for owner/name, linked by Link
/// headers the way the platform paginates. Returns the generated issues.
inline std::vector<metrics::IssueRecord> write_three_page_fixture(const fs::path& dir, const std::string& owner,
                                                                  const std::string& name,
                                                                  const std::string& api_base = "https://api.github.com") {
    const std::string path = "/repos/" + owner + "/" + name + "/issues";
    std::vector<metrics::IssueRecord> issues;
    std::vector<RecordedPage> pages;
    const auto base = make_instant(2014, 1, 1);
    for (int page = 1; page <= 3; ++page) {
        RecordedPage rec;
        rec.path = path;
        rec.query = page == 1 ? "state=all&per_page=100" : "state=all&per_page=100&page=" + std::to_string(page);
        for (int i = 0; i < 100; ++i) {
            const int number = (page - 1) * 100 + i + 1;
            const auto opened = base + Millis{static_cast<std::int64_t>(number) * 3'600'000};
            std::optional<Instant> closed;
            if (number % 3 == 0) {
                closed = opened + Millis{static_cast<std::int64_t>(number) * 60'000};
            }
            rec.body.push_back(issue_json(number, opened, closed));
            issues.push_back({std::to_string(number), opened, closed});
        }
        if (page < 3) {
            rec.headers["Link"] = "<" + api_base + path + "?state=all&per_page=100&page=" + std::to_string(page + 1) +
                                  ">; rel=\"next\", <" + api_base + path + "?state=all&per_page=100&page=3>; rel=\"last\"";
        }
        pages.push_back(std::move(rec));
    }
    write_replay(dir, pages);
    return issues;
}

}  // namespace repopulse::fixtures
