#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <set>
#include <sstream>

#include "repopulse/api/service.hpp"
#include "support/listing_fixture.hpp"

namespace repopulse::api {
namespace {

using wire::Json;

std::string golden(const std::string& name) {
    std::ifstream in(std::string(REPOPULSE_GOLDEN_DIR) + "/" + name, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Request get(const std::string& path, std::map<std::string, std::string> query = {}) {
    return Request{.method = "GET", .path = path, .query = std::move(query), .body = {}, .client = "test"};
}

Request post(const std::string& path, const std::string& body, const std::string& client = "test") {
    return Request{.method = "POST", .path = path, .query = {}, .body = body, .client = client};
}

using store::Store;

struct Rig {
    ManualClock clock{make_instant(2015, 1, 2)};
    Store db{std::make_shared<store::MemoryDocumentStore>(), clock};
    ApiService api{db};
};

TEST(Api, GoldenDensityListing) {
    Rig rig;
    fixtures::seed_go_listing(rig.db);
    const auto r = rig.api.handle(get("/metrics/api/density/golang/go/master", {{"groupBy", "week"}}));
    ASSERT_EQ(r.status, 200) << r.body;
    const auto expected = golden("density_golang_go_master_week.json");
    ASSERT_FALSE(expected.empty());
    EXPECT_EQ(r.body, expected);
    EXPECT_NE(r.body.find("\"kloc\": 639.6212584045984,"), std::string::npos);
    for (const auto* field : {"\"open\": 120", "\"closed\": 7968", "\"openCumulative\": 1347", "\"closedCumulative\": 7968"}) {
        EXPECT_NE(r.body.find(field), std::string::npos) << field;
    }
}

TEST(Api, MetricSelectsTheExtraField) {
    Rig rig;
    fixtures::seed_go_listing(rig.db);
    const auto kloc = Json::parse(rig.api.handle(get("/metrics/api/kloc/golang/go/master", {{"groupBy", "week"}})).body);
    const auto spoil =
        Json::parse(rig.api.handle(get("/metrics/api/spoilage/golang/go/master", {{"groupBy", "month"}})).body);
    ASSERT_EQ(kloc.size(), 3U);
    EXPECT_FALSE(kloc[0].contains("density"));
    EXPECT_FALSE(kloc[0].contains("spoilage"));
    ASSERT_EQ(spoil.size(), 2U);
    EXPECT_TRUE(spoil[0].contains("spoilage"));
    EXPECT_FALSE(spoil[0].contains("density"));
    std::vector<std::string> keys;
    for (const auto& [k, v] : kloc[0].items()) {
        keys.push_back(k);
    }
    EXPECT_EQ(keys, (std::vector<std::string>{"start_date", "end_date", "kloc", "issues"}));
}

TEST(Api, MetricRouteErrors) {
    Rig rig;
    fixtures::seed_go_listing(rig.db);
    rig.db.submit_request("astropy", "astropy", "master");

    const auto check = [&](const Request& req, int status, const std::string& error) {
        const auto r = rig.api.handle(req);
        EXPECT_EQ(r.status, status) << req.path;
        const auto body = Json::parse(r.body);
        EXPECT_EQ(body.at("error"), error) << r.body;
        EXPECT_TRUE(body.at("detail").is_string());
    };
    check(get("/metrics/api/density/golang/go/master", {{"groupBy", "fortnight"}}), 400, "invalid_frequency");
    check(get("/metrics/api/density/golang/go/master"), 400, "invalid_frequency");
    check(get("/metrics/api/loc/golang/go/master", {{"groupBy", "week"}}), 400, "invalid_metric");
    check(get("/metrics/api/density/nobody/nothing/master", {{"groupBy", "week"}}), 404, "project_not_found");
    // Pending projects are not served.
    check(get("/metrics/api/density/astropy/astropy/master", {{"groupBy", "week"}}), 404, "project_not_found");
    check(get("/nowhere"), 404, "not_found");
    check(post("/api/projects", "{}"), 405, "method_not_allowed");
}

TEST(Api, BranchWithSlashes) {
    Rig rig;
    const auto id = rig.db.submit_request("o", "r", "release/1.0").record.project_id;
    rig.db.put_series({id, metrics::Granularity::week}, fixtures::go_listing_week());
    rig.db.put_series({id, metrics::Granularity::month}, fixtures::go_listing_month());
    rig.db.transition(id, store::ProjectState::tracked, {.last_analyzed_at = rig.clock.now(), .failure_reason = {}});
    EXPECT_EQ(rig.api.handle(get("/metrics/api/kloc/o/r/release/1.0", {{"groupBy", "week"}})).status, 200);
}

TEST(Api, DashboardEnvelopeAndAmbiguity) {
    Rig rig;
    fixtures::seed_go_listing(rig.db);
    auto r = rig.api.handle(get("/dash/public/month/go"));
    ASSERT_EQ(r.status, 200) << r.body;
    auto body = Json::parse(r.body);
    EXPECT_EQ(body["frequency"], "month");
    EXPECT_EQ(body["project"]["owner"], "golang");
    EXPECT_EQ(body["series"].size(), 2U);
    EXPECT_TRUE(body["series"][0].contains("density"));
    EXPECT_TRUE(body["series"][0].contains("spoilage"));
    EXPECT_EQ(body["available_metrics"], Json::parse(R"(["kloc","density","spoilage"])"));

    r = rig.api.handle(get("/dash/public/week/spoilage/go"));
    ASSERT_EQ(r.status, 200);
    body = Json::parse(r.body);
    EXPECT_EQ(body["series"].size(), 3U);
    EXPECT_FALSE(body["series"][0].contains("density"));

    EXPECT_EQ(rig.api.handle(get("/dash/public/week/astropy")).status, 404);
    EXPECT_EQ(rig.api.handle(get("/dash/public/fortnight/go")).status, 400);
    EXPECT_EQ(rig.api.handle(get("/dash/public/week/loc/go")).status, 400);

    // Two owners, one name.
    for (const auto* owner : {"alice", "bob"}) {
        const auto id = rig.db.submit_request(owner, "demo", "main").record.project_id;
        rig.db.put_series({id, metrics::Granularity::week}, fixtures::go_listing_week());
        rig.db.put_series({id, metrics::Granularity::month}, fixtures::go_listing_month());
        rig.db.transition(id, store::ProjectState::tracked, {.last_analyzed_at = rig.clock.now(), .failure_reason = {}});
    }
    r = rig.api.handle(get("/dash/public/week/demo"));
    EXPECT_EQ(r.status, 409);
    body = Json::parse(r.body);
    EXPECT_EQ(body["error"], "ambiguous_project");
    ASSERT_EQ(body["candidates"].size(), 2U);
    std::set<std::string> owners{body["candidates"][0]["owner"], body["candidates"][1]["owner"]};
    EXPECT_EQ(owners, (std::set<std::string>{"alice", "bob"}));
}

TEST(Api, ProjectListsSplitByState) {
    Rig rig;
    EXPECT_EQ(rig.api.handle(get("/api/projects")).body, "[]\n");
    EXPECT_EQ(rig.api.handle(get("/projects/pending")).body, "[]\n");
    fixtures::seed_go_listing(rig.db);
    rig.clock.advance(Millis{1000});
    rig.db.submit_request("astropy", "astropy", "master");

    const auto tracked = Json::parse(rig.api.handle(get("/api/projects")).body);
    const auto pending = Json::parse(rig.api.handle(get("/projects/pending")).body);
    ASSERT_EQ(tracked.size(), 1U);
    ASSERT_EQ(pending.size(), 1U);
    EXPECT_EQ(tracked[0]["name"], "go");
    EXPECT_EQ(tracked[0]["state"], "tracked");
    EXPECT_EQ(pending[0]["name"], "astropy");
    EXPECT_EQ(pending[0]["state"], "pending");
}

TEST(Api, PaginationSweep) {
    Rig rig;
    std::vector<std::string> ids;
    for (int i = 0; i < 50; ++i) {
        ids.push_back(rig.db.submit_request("o", "p" + std::to_string(i), "main").record.project_id);
        rig.clock.advance(Millis{1000});
    }
    auto r = rig.api.handle(get("/projects/pending"));
    EXPECT_EQ(r.header("X-Total-Count"), "50");
    EXPECT_EQ(Json::parse(r.body).size(), 20U);

    for (const int per_page : {1, 7, 20, 50, 100}) {
        std::vector<std::string> seen;
        for (int page = 1;; ++page) {
            r = rig.api.handle(
                get("/projects/pending", {{"page", std::to_string(page)}, {"per_page", std::to_string(per_page)}}));
            ASSERT_EQ(r.status, 200);
            const auto body = Json::parse(r.body);
            if (body.empty()) {
                break;
            }
            EXPECT_LE(body.size(), static_cast<std::size_t>(per_page));
            for (const auto& p : body) {
                seen.push_back(p["project_id"]);
            }
        }
        EXPECT_EQ(seen, ids) << "per_page " << per_page;
    }
    EXPECT_EQ(rig.api.handle(get("/projects/pending", {{"page", "0"}})).status, 400);
    EXPECT_EQ(rig.api.handle(get("/projects/pending", {{"per_page", "x"}})).status, 400);
    EXPECT_EQ(rig.api.handle(get("/projects/pending", {{"per_page", "101"}})).status, 400);
}

TEST(Api, TrackRequests) {
    Rig rig;
    auto r = rig.api.handle(post("/other/requests/track", R"({"owner":"astropy","name":"astropy","branch":"master"})"));
    EXPECT_EQ(r.status, 202);
    const auto first = Json::parse(r.body);
    EXPECT_EQ(first["state"], "pending");

    r = rig.api.handle(post("/other/requests/track", R"({"owner":"astropy","name":"astropy","branch":"master"})"));
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(Json::parse(r.body)["project_id"], first["project_id"]);

    EXPECT_EQ(rig.api.handle(post("/other/requests/track", R"({"owner":"astropy","name":"astropy"})")).status, 400);
    EXPECT_EQ(rig.api.handle(post("/other/requests/track", "not json")).status, 400);
    EXPECT_EQ(rig.api.handle(post("/other/requests/track", R"({"owner":1,"name":"a","branch":"b"})")).status, 400);
    EXPECT_EQ(rig.api.handle(post("/other/requests/track", R"({"owner":"","name":"a","branch":"b"})")).status, 422);
    EXPECT_EQ(rig.api.handle(post("/other/requests/track", R"({"owner":"a b","name":"a","branch":"b"})")).status,
              422);
    EXPECT_EQ(rig.api.handle(get("/other/requests/track")).status, 405);
}

TEST(Api, TrackIsRateLimitedPerClient) {
    ManualClock clock{make_instant(2015, 1, 2)};
    Store store{std::make_shared<store::MemoryDocumentStore>(), clock};
    ApiService api{store, ApiOptions{.track_rate_limit_per_minute = 3, .default_per_page = 20, .max_per_page = 100}};
    const std::string body = R"({"owner":"o","name":"n","branch":"b"})";
    for (int i = 0; i < 3; ++i) {
        EXPECT_NE(api.handle(post("/other/requests/track", body, "1.2.3.4")).status, 429);
    }
    const auto limited = api.handle(post("/other/requests/track", body, "1.2.3.4"));
    EXPECT_EQ(limited.status, 429);
    EXPECT_TRUE(limited.header("Retry-After"));
    EXPECT_NE(api.handle(post("/other/requests/track", body, "5.6.7.8")).status, 429);
    clock.advance(Millis{60'000});
    EXPECT_NE(api.handle(post("/other/requests/track", body, "1.2.3.4")).status, 429);
}

TEST(Api, ReadsArePureOverStoreState) {
    Rig a;
    Rig b;
    fixtures::seed_go_listing(a.db);
    fixtures::seed_go_listing(b.db);
    for (const auto& req : {get("/metrics/api/spoilage/golang/go/master", {{"groupBy", "month"}}),
                            get("/dash/public/week/go"), get("/api/projects")}) {
        const auto x = a.api.handle(req);
        EXPECT_EQ(x.body, b.api.handle(req).body);
        EXPECT_EQ(x.body, a.api.handle(req).body);
    }
}

TEST(Api, CorsHeaders) {
    Rig rig;
    const auto r = rig.api.handle(Request{.method = "OPTIONS", .path = "/api/projects", .query = {}, .body = {}, .client = "x"});
    EXPECT_EQ(r.status, 204);
    EXPECT_EQ(r.header("access-control-allow-origin"), "*");
    EXPECT_EQ(rig.api.handle(get("/api/projects")).header("Access-Control-Allow-Origin"), "*");
}

TEST(Api, ListenAddress) {
    EXPECT_EQ(split_listen_addr("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
    EXPECT_EQ(split_listen_addr(":0"), (std::pair<std::string, int>{"0.0.0.0", 0}));
    EXPECT_EQ(split_listen_addr("[::1]:9"), (std::pair<std::string, int>{"::1", 9}));
    EXPECT_THROW((void)split_listen_addr("localhost"), std::invalid_argument);
    EXPECT_THROW((void)split_listen_addr("h:99999"), std::invalid_argument);
}

TEST(HttpServerTest, ServesOverLoopback) {
    Rig rig;
    fixtures::seed_go_listing(rig.db);
    HttpServer server(rig.api);
    const int port = server.start("127.0.0.1:0");
    ASSERT_GT(port, 0);

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/metrics/api/density/golang/go/master?groupBy=week");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, golden("density_golang_go_master_week.json"));
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");

    res = client.Post("/other/requests/track", R"({"owner":"astropy","name":"astropy","branch":"master"})",
                      "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 202);

    res = client.Get("/projects/pending?per_page=5");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->get_header_value("X-Total-Count"), "1");
    server.stop();
}

}  // namespace
}  // namespace repopulse::api
