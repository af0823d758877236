#pragma once

// Drives the repopulse binary against a throwaway workspace: repositories
// under repos/<owner>/<name>, issue files under issues/<owner>/<name>, a file
// store and a workdir, all reached through REPOPULSE_* variables.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "repopulse/ingest/process.hpp"
#include "support/git_fixture.hpp"

namespace repopulse::fixtures {

/// Issues spread over the thirty-commit fixture's lifetime.
inline std::string thirty_commit_issues_json() {
    std::string out = "[";
    const auto start = make_instant(2014, 1, 6, 12);
    for (int i = 0; i < 12; ++i) {
        const auto opened = start + Millis{static_cast<std::int64_t>(i) * 3 * kMillisPerDay};
        out += i == 0 ? "\n" : ",\n";
        out += R"(  {"id": )" + std::to_string(i + 1) + R"(, "opened_at": ")" + format_rfc3339(opened) + "\"";
        if (i % 3 != 2) {
            out += R"(, "closed_at": ")" + format_rfc3339(opened + Millis{(i + 2) * kMillisPerDay}) + "\"";
        }
        out += "}";
    }
    return out + "\n]\n";
}

class Workspace {
public:
    explicit Workspace(const std::string& tag, Instant now = make_instant(2014, 3, 1))
        : tmp_(tag),
          env_{{"REPOPULSE_STORE_PATH", (tmp_ / "store").string()},
               {"REPOPULSE_WORKDIR", (tmp_ / "work").string()},
               {"REPOPULSE_CLONE_URL_TEMPLATE", "file://" + (tmp_ / "repos").string() + "/{owner}/{name}"},
               {"REPOPULSE_ISSUES_DIR", (tmp_ / "issues").string()},
               {"REPOPULSE_NOW", format_rfc3339(now)},
               {"REPOPULSE_LISTEN_ADDR", "127.0.0.1:0"},
               {"REPOPULSE_WORKER_COUNT", "2"},
               // Anything that slips through to the network fails fast.
               {"REPOPULSE_API_BASE", "http://127.0.0.1:9"},
               {"REPOPULSE_CRASH_AFTER_PUT", "0"}} {}

    [[nodiscard]] const fs::path& root() const { return tmp_.path(); }
    [[nodiscard]] fs::path store_path() const { return tmp_ / "store"; }
    [[nodiscard]] std::map<std::string, std::string>& env() { return env_; }

    FixtureRepo repo(const std::string& owner, const std::string& name) const {
        return FixtureRepo(tmp_ / "repos" / owner / name);
    }
    [[nodiscard]] fs::path repo_dir(const std::string& owner, const std::string& name) const {
        return tmp_ / "repos" / owner / name;
    }
    fs::path write_issues(const std::string& owner, const std::string& name, const std::string& json) const {
        const auto p = tmp_ / "issues" / owner / name / "issues.json";
        write_file(p, json);
        return p;
    }

    ingest::ProcessResult run(const std::vector<std::string>& args,
                              const std::map<std::string, std::string>& extra = {}) const {
        std::vector<std::string> argv{REPOPULSE_CLI_PATH};
        argv.insert(argv.end(), args.begin(), args.end());
        auto env = env_;
        // An empty value removes the variable.
        for (const auto& [k, v] : extra) {
            if (v.empty()) {
                env.erase(k);
            } else {
                env[k] = v;
            }
        }
        return ingest::run_process(argv, {.input = {}, .env = env, .on_stdout = {}});
    }

private:
    TempDir tmp_;
    std::map<std::string, std::string> env_;
};

/// `repopulse serve` in the background; stopped with SIGTERM on destruction.
class ServeProcess {
public:
    explicit ServeProcess(const Workspace& ws) {
        int fds[2];
        if (::pipe(fds) != 0) {
            throw std::runtime_error("pipe failed");
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            throw std::runtime_error("fork failed");
        }
        if (pid_ == 0) {
            ::dup2(fds[1], STDOUT_FILENO);
            ::close(fds[0]);
            ::close(fds[1]);
            for (const auto& [k, v] : const_cast<Workspace&>(ws).env()) {
                ::setenv(k.c_str(), v.c_str(), 1);
            }
            ::execl(REPOPULSE_CLI_PATH, REPOPULSE_CLI_PATH, "serve", static_cast<char*>(nullptr));
            std::_Exit(127);
        }
        ::close(fds[1]);
        std::string line;
        char c = 0;
        while (::read(fds[0], &c, 1) == 1 && c != '\n') {
            line += c;
        }
        ::close(fds[0]);
        const auto colon = line.rfind(':');
        if (line.rfind("listening on ", 0) != 0 || colon == std::string::npos) {
            stop();
            throw std::runtime_error("serve did not start: '" + line + "'");
        }
        port_ = std::stoi(line.substr(colon + 1));
    }
    ServeProcess(const ServeProcess&) = delete;
    ServeProcess& operator=(const ServeProcess&) = delete;
    ~ServeProcess() { stop(); }

    [[nodiscard]] int port() const { return port_; }

    /// Exit status after SIGTERM.
    int stop() {
        if (pid_ <= 0) {
            return status_;
        }
        ::kill(pid_, SIGTERM);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
        status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        return status_;
    }

private:
    pid_t pid_ = -1;
    int port_ = 0;
    int status_ = -1;
};

}  // namespace repopulse::fixtures
