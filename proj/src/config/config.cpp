#include "repopulse/config/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>

namespace repopulse::config {

namespace {

std::string strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

long long parse_int(std::string_view text, const std::string& what) {
    const auto s = strip(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError(what + ": not an integer: '" + s + "'");
    }
    return v;
}

double parse_double(std::string_view text, const std::string& what) {
    const auto s = strip(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw ConfigError(what + ": not a number: '" + s + "'");
    }
    return v;
}

Instant parse_now(const std::string& text, const std::string& what) {
    try {
        return parse_rfc3339(text);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

/// One setter per key, shared by the file and environment layers.
using Setter = std::function<void(Config&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table{
        {"store_path", [](Config& c, const std::string& v) { c.store_path = v; }},
        {"workdir", [](Config& c, const std::string& v) { c.workdir = v; }},
        {"listen_addr", [](Config& c, const std::string& v) { c.listen_addr = v; }},
        {"refresh_interval", [](Config& c, const std::string& v) { c.refresh_interval = parse_duration(v); }},
        {"token_env_name", [](Config& c, const std::string& v) { c.token_env_name = v; }},
        {"worker_count",
         [](Config& c, const std::string& v) {
             const auto n = parse_int(v, "worker_count");
             if (n < 0 || n > 1024) {
                 throw ConfigError("worker_count out of range");
             }
             c.worker_count = static_cast<unsigned>(n);
         }},
        {"max_attempts", [](Config& c, const std::string& v) { c.max_attempts = static_cast<int>(parse_int(v, "max_attempts")); }},
        {"backoff_base", [](Config& c, const std::string& v) { c.backoff_base = parse_duration(v); }},
        {"backoff_factor", [](Config& c, const std::string& v) { c.backoff_factor = parse_double(v, "backoff_factor"); }},
        {"poll_interval", [](Config& c, const std::string& v) { c.poll_interval = parse_duration(v); }},
        {"clone_url_template", [](Config& c, const std::string& v) { c.clone_url_template = v; }},
        {"api_base", [](Config& c, const std::string& v) { c.api_base = v; }},
        {"issues_dir", [](Config& c, const std::string& v) { c.issues_dir = v; }},
        {"replay_dir", [](Config& c, const std::string& v) { c.replay_dir = v; }},
        {"track_rate_limit_per_minute",
         [](Config& c, const std::string& v) {
             c.track_rate_limit_per_minute = static_cast<int>(parse_int(v, "track_rate_limit_per_minute"));
         }},
        {"now", [](Config& c, const std::string& v) { c.now = parse_now(v, "now"); }},
    };
    return table;
}

std::string env_name(const std::string& key) {
    // store_path -> REPOPULSE_STORE_PATH; listen_addr is also REPOPULSE_ADDR.
    std::string out = "REPOPULSE_";
    for (const char c : key) {
        out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

Millis parse_duration(std::string_view text) {
    const auto s = strip(text);
    std::size_t digits = 0;
    while (digits < s.size() && (std::isdigit(static_cast<unsigned char>(s[digits])) != 0)) {
        ++digits;
    }
    if (digits == 0) {
        throw ConfigError("invalid duration: '" + s + "'");
    }
    const auto n = parse_int(std::string_view(s).substr(0, digits), "duration");
    const auto unit = std::string_view(s).substr(digits);
    std::int64_t scale = 0;
    if (unit.empty() || unit == "s") {
        scale = 1000;
    } else if (unit == "ms") {
        scale = 1;
    } else if (unit == "m") {
        scale = 60'000;
    } else if (unit == "h") {
        scale = 3'600'000;
    } else if (unit == "d") {
        scale = kMillisPerDay;
    } else {
        throw ConfigError("invalid duration unit: '" + s + "'");
    }
    return Millis{n * scale};
}

void Config::validate() const {
    if (refresh_interval <= Millis{0}) {
        throw ConfigError("refresh_interval must be positive");
    }
    if (poll_interval <= Millis{0}) {
        throw ConfigError("poll_interval must be positive");
    }
    if (max_attempts < 1) {
        throw ConfigError("max_attempts must be at least 1");
    }
    if (backoff_base < Millis{0} || backoff_factor < 1.0) {
        throw ConfigError("backoff must be non-negative with a factor of at least 1");
    }
    if (store_path.empty() || workdir.empty()) {
        throw ConfigError("store_path and workdir must be set");
    }
    if (listen_addr.find(':') == std::string::npos) {
        throw ConfigError("listen_addr must be host:port");
    }
    if (track_rate_limit_per_minute < 0) {
        throw ConfigError("track_rate_limit_per_minute must be non-negative");
    }
}

std::optional<std::string> Config::token() const {
    auto t = process_env(token_env_name);
    if (t && t->empty()) {
        return std::nullopt;
    }
    return t;
}

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) {
        return std::string(v);
    }
    return std::nullopt;
}

Config load(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    Config c;
    if (file) {
        std::ifstream in(*file);
        if (!in) {
            throw ConfigError("cannot read config file " + file->string());
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config file " + file->string() + " is not JSON: " + e.what());
        }
        if (!doc.is_object()) {
            throw ConfigError("config file must hold a JSON object");
        }
        for (const auto& [key, value] : doc.items()) {
            const auto it = setters().find(key);
            if (it == setters().end()) {
                throw ConfigError("unknown config key: " + key);
            }
            it->second(c, value.is_string() ? value.get<std::string>() : value.dump());
        }
        // Relative paths in a config file are relative to the file.
        const auto base = file->parent_path();
        for (auto* p : {&c.store_path, &c.workdir}) {
            if (p->is_relative() && doc.contains(p == &c.store_path ? "store_path" : "workdir")) {
                *p = base / *p;
            }
        }
    }
    for (const auto& [key, set] : setters()) {
        if (auto v = env(env_name(key))) {
            set(c, *v);
        }
    }
    if (auto v = env("REPOPULSE_ADDR")) {
        c.listen_addr = *v;
    }
    if (auto v = env("REPOPULSE_STORE")) {
        c.store_path = *v;
    }
    c.validate();
    return c;
}

}  // namespace repopulse::config
