#include "repopulse/store/store.hpp"

#include <algorithm>

#include "repopulse/common/hash.hpp"
#include "repopulse/ingest/source.hpp"

namespace repopulse::store {

using wire::Json;

std::string_view to_string(ProjectState s) {
    switch (s) {
        case ProjectState::pending:
            return "pending";
        case ProjectState::tracked:
            return "tracked";
        case ProjectState::failed:
            return "failed";
    }
    return "pending";
}

std::optional<ProjectState> parse_state(std::string_view text) {
    if (text == "pending") {
        return ProjectState::pending;
    }
    if (text == "tracked") {
        return ProjectState::tracked;
    }
    if (text == "failed") {
        return ProjectState::failed;
    }
    return std::nullopt;
}

void ProjectRecord::validate() const {
    if (state == ProjectState::tracked && !last_analyzed_at) {
        throw StoreError(StoreErrc::corrupt, "tracked project " + project_id + " lacks last_analyzed_at");
    }
    if (state == ProjectState::failed && !failure_reason) {
        throw StoreError(StoreErrc::corrupt, "failed project " + project_id + " lacks failure_reason");
    }
}

bool is_legal_transition(ProjectState from, ProjectState to) {
    using S = ProjectState;
    return (from == S::pending && (to == S::tracked || to == S::failed)) || (from == S::tracked && to == S::tracked) ||
           (from == S::failed && to == S::pending);
}

std::string make_project_id(std::string_view owner, std::string_view name, std::string_view branch) {
    std::string triple;
    triple.append(owner).push_back('\0');
    triple.append(name).push_back('\0');
    triple.append(branch);
    const auto hi = fnv1a64(triple);
    const auto lo = fnv1a64(triple, hi ^ 0x9e3779b97f4a7c15ULL);
    return to_hex(hi, 16) + to_hex(lo >> 32, 8);
}

namespace {

Json optional_time(const std::optional<Instant>& t) { return t ? Json(format_rfc3339(*t)) : Json(nullptr); }

std::optional<Instant> read_optional_time(const Json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) {
        return std::nullopt;
    }
    return parse_rfc3339(doc.at(key).get<std::string>());
}

Json parse_document(const std::string& text, std::string_view key) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw StoreError(StoreErrc::corrupt, "document " + std::string(key) + " is not JSON: " + e.what());
    }
}

template <typename F>
auto decode(std::string_view key, F&& f) {
    try {
        return f();
    } catch (const StoreError&) {
        throw;
    } catch (const std::exception& e) {
        throw StoreError(StoreErrc::corrupt, "document " + std::string(key) + ": " + e.what());
    }
}

std::string project_key(std::string_view id) { return "projects/" + std::string(id); }

std::string series_key(const SeriesKey& key) {
    return "series/" + key.project_id + "/" + std::string(metrics::to_string(key.granularity));
}

void check_project_id(std::string_view id) {
    const bool ok = id.size() == 24 && std::all_of(id.begin(), id.end(), [](char c) {
                        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                    });
    if (!ok) {
        throw StoreError(StoreErrc::invalid_identifier, "malformed project id: " + std::string(id));
    }
}

}  // namespace

Json project_to_json(const ProjectRecord& r) {
    Json doc;
    doc["project_id"] = r.project_id;
    doc["owner"] = r.owner;
    doc["name"] = r.name;
    doc["branch"] = r.branch;
    doc["state"] = std::string(to_string(r.state));
    doc["requested_at"] = format_rfc3339(r.requested_at);
    doc["last_analyzed_at"] = optional_time(r.last_analyzed_at);
    doc["failure_reason"] = r.failure_reason ? Json(*r.failure_reason) : Json(nullptr);
    return doc;
}

ProjectRecord project_from_json(const Json& doc) {
    ProjectRecord r;
    r.project_id = doc.at("project_id").get<std::string>();
    r.owner = doc.at("owner").get<std::string>();
    r.name = doc.at("name").get<std::string>();
    r.branch = doc.at("branch").get<std::string>();
    const auto state = parse_state(doc.at("state").get<std::string>());
    if (!state) {
        throw StoreError(StoreErrc::corrupt, "unknown project state");
    }
    r.state = *state;
    r.requested_at = parse_rfc3339(doc.at("requested_at").get<std::string>());
    r.last_analyzed_at = read_optional_time(doc, "last_analyzed_at");
    if (doc.contains("failure_reason") && !doc.at("failure_reason").is_null()) {
        r.failure_reason = doc.at("failure_reason").get<std::string>();
    }
    r.validate();
    return r;
}

Json snapshot_to_json(const ingest::IngestSnapshot& s) {
    Json doc;
    doc["head_commit"] = s.head_commit;
    doc["fetched_at_ms"] = epoch_ms(s.fetched_at);
    doc["commit_count"] = s.commit_count;
    doc["issues_cursor_ms"] = s.issues_cursor ? Json(epoch_ms(*s.issues_cursor)) : Json(nullptr);
    Json histories = Json::array();
    for (const auto& h : s.histories) {
        Json deltas = Json::array();
        for (const auto& d : h.deltas) {
            deltas.push_back(Json::array({epoch_ms(d.timestamp), d.delta_loc}));
        }
        histories.push_back(Json{{"path", h.file_path}, {"deltas", std::move(deltas)}});
    }
    doc["histories"] = std::move(histories);
    Json issues = Json::array();
    for (const auto& i : s.issues) {
        issues.push_back(Json::array(
            {i.issue_id, epoch_ms(i.opened_at), i.closed_at ? Json(epoch_ms(*i.closed_at)) : Json(nullptr)}));
    }
    doc["issues"] = std::move(issues);
    Json activity = Json::array();
    for (const auto& a : s.activity) {
        activity.push_back(Json::array({a.author, epoch_ms(a.timestamp)}));
    }
    doc["activity"] = std::move(activity);
    return doc;
}

ingest::IngestSnapshot snapshot_from_json(const Json& doc) {
    ingest::IngestSnapshot s;
    s.head_commit = doc.at("head_commit").get<std::string>();
    s.fetched_at = from_epoch_ms(doc.at("fetched_at_ms").get<std::int64_t>());
    s.commit_count = doc.at("commit_count").get<std::size_t>();
    if (!doc.at("issues_cursor_ms").is_null()) {
        s.issues_cursor = from_epoch_ms(doc.at("issues_cursor_ms").get<std::int64_t>());
    }
    for (const auto& h : doc.at("histories")) {
        metrics::FileHistory fh;
        fh.file_path = h.at("path").get<std::string>();
        for (const auto& d : h.at("deltas")) {
            fh.deltas.push_back({fh.file_path, from_epoch_ms(d.at(0).get<std::int64_t>()), d.at(1).get<std::int64_t>()});
        }
        s.histories.push_back(std::move(fh));
    }
    for (const auto& i : doc.at("issues")) {
        metrics::IssueRecord rec{i.at(0).get<std::string>(), from_epoch_ms(i.at(1).get<std::int64_t>()), std::nullopt};
        if (!i.at(2).is_null()) {
            rec.closed_at = from_epoch_ms(i.at(2).get<std::int64_t>());
        }
        s.issues.push_back(std::move(rec));
    }
    for (const auto& a : doc.at("activity")) {
        s.activity.push_back({a.at(0).get<std::string>(), from_epoch_ms(a.at(1).get<std::int64_t>())});
    }
    return s;
}

Store::Store(std::shared_ptr<DocumentStore> docs, Clock& clock) : docs_(std::move(docs)), clock_(clock) {}

void Store::write_project(const ProjectRecord& record) {
    record.validate();
    docs_->put(project_key(record.project_id), wire::render(project_to_json(record)));
}

SubmitResult Store::submit_request(std::string_view owner, std::string_view name, std::string_view branch) {
    if (!ingest::is_valid_identifier(owner)) {
        throw StoreError(StoreErrc::invalid_identifier, "invalid owner: '" + std::string(owner) + "'");
    }
    if (!ingest::is_valid_identifier(name)) {
        throw StoreError(StoreErrc::invalid_identifier, "invalid repository name: '" + std::string(name) + "'");
    }
    if (!ingest::is_valid_branch(branch)) {
        throw StoreError(StoreErrc::invalid_identifier, "invalid branch: '" + std::string(branch) + "'");
    }
    SubmitResult result;
    docs_->exclusive([&] {
        const auto id = make_project_id(owner, name, branch);
        if (auto existing = find_project(id)) {
            if (existing->owner != owner || existing->name != name || existing->branch != branch) {
                throw StoreError(StoreErrc::conflict, "project id collision for " + id);
            }
            if (existing->state == ProjectState::failed) {
                existing->state = ProjectState::pending;
                existing->failure_reason.reset();
                write_project(*existing);
                result = {*existing, true};
                return;
            }
            result = {*existing, false};
            return;
        }
        ProjectRecord r;
        r.project_id = id;
        r.owner = std::string(owner);
        r.name = std::string(name);
        r.branch = std::string(branch);
        r.state = ProjectState::pending;
        r.requested_at = clock_.now();
        write_project(r);
        result = {r, true};
    });
    return result;
}

ProjectRecord Store::transition(std::string_view project_id, ProjectState new_state, const TransitionMetadata& meta,
                                std::optional<ProjectState> expected) {
    check_project_id(project_id);
    ProjectRecord out;
    docs_->exclusive([&] {
        auto r = find_project(project_id);
        if (!r) {
            throw StoreError(StoreErrc::not_found, "unknown project " + std::string(project_id));
        }
        if (expected && r->state != *expected) {
            throw StoreError(StoreErrc::conflict, "project " + std::string(project_id) + " is " +
                                                      std::string(to_string(r->state)) + ", expected " +
                                                      std::string(to_string(*expected)));
        }
        if (!is_legal_transition(r->state, new_state)) {
            throw StoreError(StoreErrc::illegal_transition, "illegal transition " + std::string(to_string(r->state)) +
                                                                " -> " + std::string(to_string(new_state)));
        }
        switch (new_state) {
            case ProjectState::tracked:
                if (!meta.last_analyzed_at) {
                    throw StoreError(StoreErrc::illegal_transition, "tracked requires last_analyzed_at");
                }
                r->last_analyzed_at = meta.last_analyzed_at;
                r->failure_reason.reset();
                break;
            case ProjectState::failed:
                if (!meta.failure_reason) {
                    throw StoreError(StoreErrc::illegal_transition, "failed requires failure_reason");
                }
                r->failure_reason = meta.failure_reason;
                break;
            case ProjectState::pending:
                r->failure_reason.reset();
                break;
        }
        r->state = new_state;
        write_project(*r);
        out = *r;
    });
    return out;
}

std::optional<ProjectRecord> Store::find_project(std::string_view project_id) const {
    check_project_id(project_id);
    const auto key = project_key(project_id);
    const auto text = docs_->get(key);
    if (!text) {
        return std::nullopt;
    }
    return decode(key, [&] { return project_from_json(parse_document(*text, key)); });
}

ProjectRecord Store::get_project(std::string_view project_id) const {
    auto r = find_project(project_id);
    if (!r) {
        throw StoreError(StoreErrc::not_found, "unknown project " + std::string(project_id));
    }
    return *r;
}

std::optional<ProjectRecord> Store::find_project(std::string_view owner, std::string_view name,
                                                 std::string_view branch) const {
    return find_project(make_project_id(owner, name, branch));
}

std::vector<ProjectRecord> Store::list_projects(std::optional<ProjectState> filter) const {
    std::vector<ProjectRecord> out;
    for (const auto& key : docs_->list("projects")) {
        const auto text = docs_->get(key);
        if (!text) {
            continue;  // removed since listing
        }
        auto r = decode(key, [&] { return project_from_json(parse_document(*text, key)); });
        if (!filter || r.state == *filter) {
            out.push_back(std::move(r));
        }
    }
    std::sort(out.begin(), out.end(), [](const ProjectRecord& a, const ProjectRecord& b) {
        return std::tie(a.requested_at, a.project_id) < std::tie(b.requested_at, b.project_id);
    });
    return out;
}

void Store::put_series(const SeriesKey& key, const metrics::MetricSeries& series) {
    check_project_id(key.project_id);
    if (series.granularity != key.granularity) {
        throw StoreError(StoreErrc::invalid_identifier, "series granularity does not match its key");
    }
    try {
        series.validate();
    } catch (const metrics::MetricsError& e) {
        throw StoreError(StoreErrc::invalid_identifier, std::string("refusing invalid series: ") + e.what());
    }
    docs_->put(series_key(key), wire::render(wire::series_document(series, key.project_id)));
}

std::optional<std::string> Store::series_document_text(const SeriesKey& key) const {
    check_project_id(key.project_id);
    return docs_->get(series_key(key));
}

std::optional<metrics::MetricSeries> Store::find_series(const SeriesKey& key) const {
    const auto text = series_document_text(key);
    if (!text) {
        return std::nullopt;
    }
    const auto k = series_key(key);
    return decode(k, [&] { return wire::series_from_document(parse_document(*text, k)); });
}

metrics::MetricSeries Store::get_series(const SeriesKey& key) const {
    auto s = find_series(key);
    if (!s) {
        throw StoreError(StoreErrc::not_found, "no " + std::string(metrics::to_string(key.granularity)) +
                                                   " series for project " + key.project_id);
    }
    return std::move(*s);
}

void Store::put_snapshot(std::string_view project_id, const ingest::IngestSnapshot& snapshot) {
    check_project_id(project_id);
    docs_->put("snapshots/" + std::string(project_id), snapshot_to_json(snapshot).dump());
}

std::optional<ingest::IngestSnapshot> Store::find_snapshot(std::string_view project_id) const {
    check_project_id(project_id);
    const auto key = "snapshots/" + std::string(project_id);
    const auto text = docs_->get(key);
    if (!text) {
        return std::nullopt;
    }
    return decode(key, [&] { return snapshot_from_json(parse_document(*text, key)); });
}

std::shared_ptr<DocumentStore> open_file_store(const std::filesystem::path& path) {
    return std::make_shared<FileDocumentStore>(path);
}

}  // namespace repopulse::store
