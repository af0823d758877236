#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repopulse/common/time.hpp"
#include "repopulse/ingest/snapshot.hpp"
#include "repopulse/metrics/types.hpp"
#include "repopulse/store/document_store.hpp"
#include "repopulse/wire/wire.hpp"

namespace repopulse::store {

enum class ProjectState { pending, tracked, failed };

[[nodiscard]] std::string_view to_string(ProjectState s);
[[nodiscard]] std::optional<ProjectState> parse_state(std::string_view text);

struct ProjectRecord {
    std::string project_id;
    std::string owner;
    std::string name;
    std::string branch;
    ProjectState state = ProjectState::pending;
    Instant requested_at;
    std::optional<Instant> last_analyzed_at;
    std::optional<std::string> failure_reason;

    bool operator==(const ProjectRecord&) const = default;

    /// Throws StoreError(corrupt) when the state invariants do not hold.
    void validate() const;
};

struct SeriesKey {
    std::string project_id;
    metrics::Granularity granularity = metrics::Granularity::week;
};

/// Metadata a transition may need: last_analyzed_at for tracked,
/// failure_reason for failed.
struct TransitionMetadata {
    std::optional<Instant> last_analyzed_at;
    std::optional<std::string> failure_reason;
};

struct SubmitResult {
    ProjectRecord record;
    /// False when the triple was already pending or tracked.
    bool created = false;
};

[[nodiscard]] bool is_legal_transition(ProjectState from, ProjectState to);

/// Stable 24-hex-digit id derived from (owner, name, branch).
[[nodiscard]] std::string make_project_id(std::string_view owner, std::string_view name, std::string_view branch);

[[nodiscard]] wire::Json project_to_json(const ProjectRecord& record);
[[nodiscard]] ProjectRecord project_from_json(const wire::Json& doc);

[[nodiscard]] wire::Json snapshot_to_json(const ingest::IngestSnapshot& snapshot);
[[nodiscard]] ingest::IngestSnapshot snapshot_from_json(const wire::Json& doc);

/// Project lifecycle, series and snapshots over a DocumentStore.
///
/// Layout: projects/<id>, series/<id>/<week|month>, snapshots/<id>, plus
/// free-form documents under other prefixes for the worker.
class Store {
public:
    Store(std::shared_ptr<DocumentStore> docs, Clock& clock);

    /// Idempotent: an existing pending or tracked record for the triple is
    /// returned unchanged; a failed one moves back to pending. Throws
    /// StoreError(invalid_identifier) on malformed identifiers.
    SubmitResult submit_request(std::string_view owner, std::string_view name, std::string_view branch);

    /// Compare-and-set on state. `expected`, when given, must match the
    /// current state or StoreError(conflict) is thrown.
    ProjectRecord transition(std::string_view project_id, ProjectState new_state, const TransitionMetadata& meta,
                             std::optional<ProjectState> expected = std::nullopt);

    [[nodiscard]] std::optional<ProjectRecord> find_project(std::string_view project_id) const;
    [[nodiscard]] ProjectRecord get_project(std::string_view project_id) const;
    [[nodiscard]] std::optional<ProjectRecord> find_project(std::string_view owner, std::string_view name,
                                                            std::string_view branch) const;
    /// Ordered by requested_at, then project_id.
    [[nodiscard]] std::vector<ProjectRecord> list_projects(std::optional<ProjectState> filter = std::nullopt) const;

    void put_series(const SeriesKey& key, const metrics::MetricSeries& series);
    /// Throws StoreError(not_found).
    [[nodiscard]] metrics::MetricSeries get_series(const SeriesKey& key) const;
    [[nodiscard]] std::optional<metrics::MetricSeries> find_series(const SeriesKey& key) const;
    /// The stored document text, served without re-encoding.
    [[nodiscard]] std::optional<std::string> series_document_text(const SeriesKey& key) const;

    void put_snapshot(std::string_view project_id, const ingest::IngestSnapshot& snapshot);
    [[nodiscard]] std::optional<ingest::IngestSnapshot> find_snapshot(std::string_view project_id) const;

    [[nodiscard]] DocumentStore& documents() { return *docs_; }
    [[nodiscard]] const DocumentStore& documents() const { return *docs_; }
    [[nodiscard]] Clock& clock() const { return clock_; }

private:
    void write_project(const ProjectRecord& record);

    std::shared_ptr<DocumentStore> docs_;
    Clock& clock_;
};

/// Opens the bundled file backend at `path`.
[[nodiscard]] std::shared_ptr<DocumentStore> open_file_store(const std::filesystem::path& path);

}  // namespace repopulse::store
