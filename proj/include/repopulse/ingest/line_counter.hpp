#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace repopulse::ingest {

/// Turns file content into a size. Swap implementations to count logical or
/// non-comment lines instead of physical ones.
class LineCounter {
public:
    virtual ~LineCounter() = default;
    [[nodiscard]] virtual std::int64_t count(std::string_view content) const = 0;
};

/// Newline-terminated lines; a trailing fragment without '\n' is not counted.
class PhysicalLineCounter final : public LineCounter {
public:
    [[nodiscard]] std::int64_t count(std::string_view content) const override;
};

/// Git's heuristic: a NUL in the first 8000 bytes marks the content binary.
[[nodiscard]] bool looks_binary(std::string_view content);

/// Decides which repository paths are source files.
class SourceFilter {
public:
    /// Default allow-list of common source extensions; vendored and generated
    /// trees (vendor/, third_party/, node_modules/, ...) excluded.
    SourceFilter();
    SourceFilter(std::vector<std::string> extensions, std::vector<std::string> excluded_dirs);

    [[nodiscard]] bool accepts(std::string_view path) const;

    [[nodiscard]] const std::vector<std::string>& extensions() const { return extensions_; }
    [[nodiscard]] const std::vector<std::string>& excluded_dirs() const { return excluded_dirs_; }

private:
    std::vector<std::string> extensions_;
    std::vector<std::string> excluded_dirs_;
};

}  // namespace repopulse::ingest
