#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace repopulse::ingest {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

struct ProcessOptions {
    std::string input;
    /// Added to (or overriding) the inherited environment.
    std::map<std::string, std::string> env;
    /// When set, stdout is streamed here instead of collected in `out`.
    std::function<void(std::string_view)> on_stdout;
};

/// Runs argv[0] (looked up on PATH) without a shell. Throws std::system_error
/// if the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

}  // namespace repopulse::ingest
