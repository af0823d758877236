#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "repopulse/common/time.hpp"

namespace repopulse::config {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything the service processes need. Loaded from defaults, then an
/// optional JSON config file, then REPOPULSE_* environment variables.
struct Config {
    std::filesystem::path store_path = "repopulse-data/store";
    std::filesystem::path workdir = "repopulse-data/work";
    std::string listen_addr = "127.0.0.1:8080";
    Millis refresh_interval{24LL * 3600 * 1000};
    /// Name of the environment variable holding the platform token.
    std::string token_env_name = "REPOPULSE_TOKEN";
    unsigned worker_count = 0;  // 0: one per processor
    int max_attempts = 3;
    Millis backoff_base{30'000};
    double backoff_factor = 4.0;
    Millis poll_interval{5'000};
    std::string clone_url_template = "https://github.com/{owner}/{name}.git";
    std::string api_base = "https://api.github.com";
    /// When set, issues come from <issues_dir>/<owner>/<name>/issues.json.
    std::optional<std::filesystem::path> issues_dir;
    /// When set, platform API calls are answered from recorded exchanges.
    std::optional<std::filesystem::path> replay_dir;
    /// POST requests allowed per client address per minute.
    int track_rate_limit_per_minute = 30;
    /// Pins the clock, for reproducible runs.
    std::optional<Instant> now;

    /// Throws ConfigError when a value is out of range.
    void validate() const;

    [[nodiscard]] std::optional<std::string> token() const;
};

/// "90s", "15m", "24h", "7d", "250ms" or a bare number of seconds.
[[nodiscard]] Millis parse_duration(std::string_view text);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
[[nodiscard]] std::optional<std::string> process_env(const std::string& name);

/// Defaults, then `file` (if given; must exist), then environment overrides.
[[nodiscard]] Config load(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

}  // namespace repopulse::config
