#include "repopulse/ingest/line_counter.hpp"

#include <algorithm>

namespace repopulse::ingest {

std::int64_t PhysicalLineCounter::count(std::string_view content) const {
    return static_cast<std::int64_t>(std::count(content.begin(), content.end(), '\n'));
}

bool looks_binary(std::string_view content) {
    return content.substr(0, 8000).find('\0') != std::string_view::npos;
}

SourceFilter::SourceFilter()
    : SourceFilter({".c", ".cc", ".cpp", ".cxx", ".h", ".hh", ".hpp", ".hxx", ".inl", ".py", ".pyx", ".go", ".rs",
                    ".java", ".kt", ".scala", ".js", ".jsx", ".ts", ".tsx", ".rb", ".php", ".cs", ".swift", ".m",
                    ".mm", ".f", ".f90", ".f95", ".jl", ".r", ".lua", ".pl", ".sh", ".hs", ".ml", ".ex", ".erl",
                    ".clj", ".cu", ".s"},
                   {"vendor", "third_party", "thirdparty", "node_modules", "external", "extern", "deps"}) {}

SourceFilter::SourceFilter(std::vector<std::string> extensions, std::vector<std::string> excluded_dirs)
    : extensions_(std::move(extensions)), excluded_dirs_(std::move(excluded_dirs)) {}

bool SourceFilter::accepts(std::string_view path) const {
    // Any directory component on the exclusion list rules the path out.
    std::size_t start = 0;
    while (true) {
        const auto slash = path.find('/', start);
        if (slash == std::string_view::npos) {
            break;
        }
        const auto component = path.substr(start, slash - start);
        if (std::find(excluded_dirs_.begin(), excluded_dirs_.end(), component) != excluded_dirs_.end()) {
            return false;
        }
        start = slash + 1;
    }
    const auto name = path.substr(start);
    const auto dot = name.rfind('.');
    if (dot == std::string_view::npos || dot == 0) {
        return false;
    }
    std::string ext(name.substr(dot));
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return std::find(extensions_.begin(), extensions_.end(), ext) != extensions_.end();
}

}  // namespace repopulse::ingest
