#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repopulse::store {

enum class StoreErrc {
    not_found,
    invalid_identifier,
    illegal_transition,
    conflict,
    io,
    corrupt,
};

[[nodiscard]] std::string_view to_string(StoreErrc code);

class StoreError : public std::runtime_error {
public:
    StoreError(StoreErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] StoreErrc code() const noexcept { return code_; }

private:
    StoreErrc code_;
};

/// Keys are slash-separated paths of [a-z0-9_.-] segments, e.g.
/// "series/<id>/week". Throws StoreError(invalid_identifier) otherwise.
void check_key(std::string_view key);

/// Key to document text. put replaces the whole document atomically: a
/// concurrent or later reader sees the old text or the new text, never a mix.
class DocumentStore {
public:
    virtual ~DocumentStore() = default;

    [[nodiscard]] virtual std::optional<std::string> get(std::string_view key) const = 0;
    virtual void put(std::string_view key, std::string_view document) = 0;
    /// Returns whether a document was removed.
    virtual bool remove(std::string_view key) = 0;
    /// Keys directly under `prefix` (no trailing slash), sorted.
    [[nodiscard]] virtual std::vector<std::string> list(std::string_view prefix) const = 0;

    /// Runs `fn` while holding the store's write lock, which also excludes
    /// other processes sharing the same backend.
    virtual void exclusive(const std::function<void()>& fn) = 0;
};

/// One file per document under a root directory: <root>/<key>.json.
/// Writes go through a temporary file, fsync and rename.
class FileDocumentStore final : public DocumentStore {
public:
    explicit FileDocumentStore(std::filesystem::path root);

    [[nodiscard]] std::optional<std::string> get(std::string_view key) const override;
    void put(std::string_view key, std::string_view document) override;
    bool remove(std::string_view key) override;
    [[nodiscard]] std::vector<std::string> list(std::string_view prefix) const override;
    void exclusive(const std::function<void()>& fn) override;

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }
    [[nodiscard]] std::filesystem::path path_for(std::string_view key) const;

private:
    std::filesystem::path root_;
    std::recursive_mutex mutex_;
    int lock_depth_ = 0;
    int lock_fd_ = -1;
};

class MemoryDocumentStore final : public DocumentStore {
public:
    [[nodiscard]] std::optional<std::string> get(std::string_view key) const override;
    void put(std::string_view key, std::string_view document) override;
    bool remove(std::string_view key) override;
    [[nodiscard]] std::vector<std::string> list(std::string_view prefix) const override;
    void exclusive(const std::function<void()>& fn) override;

private:
    mutable std::mutex data_mutex_;
    std::recursive_mutex write_mutex_;
    std::map<std::string, std::string, std::less<>> docs_;
};

}  // namespace repopulse::store
