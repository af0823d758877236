#include "repopulse/ingest/source.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "repopulse/ingest/errors.hpp"

namespace repopulse::ingest {

std::string_view to_string(HostKind kind) {
    switch (kind) {
        case HostKind::github:
            return "github";
        case HostKind::generic_git:
            return "generic-git";
    }
    return "generic-git";
}

bool is_valid_clone_url(std::string_view url) {
    if (url.empty() || std::any_of(url.begin(), url.end(), [](unsigned char c) { return std::isspace(c) != 0; })) {
        return false;
    }
    const auto sep = url.find("://");
    if (sep != std::string_view::npos) {
        static constexpr std::array<std::string_view, 5> kSchemes{"https", "http", "ssh", "git", "file"};
        const auto scheme = url.substr(0, sep);
        if (std::find(kSchemes.begin(), kSchemes.end(), scheme) == kSchemes.end()) {
            return false;
        }
        const auto rest = url.substr(sep + 3);
        if (scheme == "file") {
            return rest.size() > 1 && rest.front() == '/';
        }
        const auto slash = rest.find('/');
        return slash != std::string_view::npos && slash > 0 && slash + 1 < rest.size();
    }
    // scp-like: [user@]host:path
    const auto colon = url.find(':');
    const auto at = url.find('@');
    return colon != std::string_view::npos && colon > 0 && colon + 1 < url.size() &&
           (at == std::string_view::npos || at < colon) && url.find('/') > colon;
}

bool is_valid_identifier(std::string_view id) {
    if (id.empty() || id.size() > 100 || id == "." || id == "..") {
        return false;
    }
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) != 0 || c == '-' || c == '_' || c == '.';
    });
}

bool is_valid_branch(std::string_view b) {
    if (b.empty() || b.size() > 255 || b.front() == '/' || b.back() == '/' || b.front() == '-' || b.back() == '.' ||
        b.ends_with(".lock") || b == "@") {
        return false;
    }
    if (b.find("..") != std::string_view::npos || b.find("//") != std::string_view::npos ||
        b.find("@{") != std::string_view::npos || b.find("/.") != std::string_view::npos || b.front() == '.') {
        return false;
    }
    return std::none_of(b.begin(), b.end(), [](unsigned char c) {
        return c < 0x20 || c == 0x7f || c == ' ' || c == '~' || c == '^' || c == ':' || c == '?' || c == '*' ||
               c == '[' || c == '\\';
    });
}

void RepoSource::validate() const {
    if (!is_valid_clone_url(clone_url)) {
        throw IngestError(IngestErrc::invalid_source, "invalid clone url: " + clone_url);
    }
    if (!is_valid_branch(default_branch)) {
        throw IngestError(IngestErrc::invalid_source, "invalid branch name: '" + default_branch + "'");
    }
    if (host_kind == HostKind::github &&
        (!slug || !is_valid_identifier(slug->owner) || !is_valid_identifier(slug->name))) {
        throw IngestError(IngestErrc::invalid_source, "github source needs a valid owner/name");
    }
}

std::string expand_url_template(std::string_view tmpl, const RepoSlug& slug, std::string_view branch) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                const auto key = tmpl.substr(i + 1, close - i - 1);
                if (key == "owner") {
                    out += slug.owner;
                } else if (key == "name") {
                    out += slug.name;
                } else if (key == "branch") {
                    out += branch;
                } else {
                    out += tmpl.substr(i, close - i + 1);
                }
                i = close + 1;
                continue;
            }
        }
        out += tmpl[i++];
    }
    return out;
}

}  // namespace repopulse::ingest
