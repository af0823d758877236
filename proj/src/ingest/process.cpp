#include "repopulse/ingest/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <csignal>
#include <stdexcept>
#include <system_error>
#include <utility>

extern char** environ;

namespace repopulse::ingest {

namespace {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Fd& operator=(Fd&& other) noexcept {
        reset();
        fd_ = std::exchange(other.fd_, -1);
        return *this;
    }
    ~Fd() { reset(); }

    [[nodiscard]] int get() const { return fd_; }
    void reset() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) {
        throw std::system_error(errno, std::generic_category(), "pipe2");
    }
    return {Fd{fds[0]}, Fd{fds[1]}};
}

std::vector<std::string> build_environment(const std::map<std::string, std::string>& overrides) {
    std::vector<std::string> env;
    for (char** e = environ; *e != nullptr; ++e) {
        const std::string_view entry{*e};
        const auto eq = entry.find('=');
        const auto key = std::string(entry.substr(0, eq));
        if (!overrides.contains(key)) {
            env.emplace_back(entry);
        }
    }
    for (const auto& [k, v] : overrides) {
        env.push_back(k + "=" + v);
    }
    return env;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
    if (argv.empty()) {
        throw std::invalid_argument("run_process: empty argv");
    }
    auto [in_read, in_write] = make_pipe();
    auto [out_read, out_write] = make_pipe();
    auto [err_read, err_write] = make_pipe();

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_read.get(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_write.get(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err_write.get(), STDERR_FILENO);

    std::vector<char*> args;
    for (const auto& a : argv) {
        args.push_back(const_cast<char*>(a.c_str()));
    }
    args.push_back(nullptr);

    auto env_strings = build_environment(options.env);
    std::vector<char*> envp;
    for (auto& e : env_strings) {
        envp.push_back(e.data());
    }
    envp.push_back(nullptr);

    pid_t pid = 0;
    const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) {
        throw std::system_error(rc, std::generic_category(), "posix_spawnp " + argv[0]);
    }
    in_read.reset();
    out_write.reset();
    err_write.reset();

    // A child that exits early must not kill us on write.
    std::signal(SIGPIPE, SIG_IGN);

    ProcessResult result;
    std::size_t written = 0;
    if (options.input.empty()) {
        in_write.reset();
    } else {
        ::fcntl(in_write.get(), F_SETFL, O_NONBLOCK);
    }

    const auto reap = [pid] {
        int status = 0;
        while (::waitpid(pid, &status, 0) < 0) {
            if (errno != EINTR) {
                throw std::system_error(errno, std::generic_category(), "waitpid");
            }
        }
        return status;
    };

    std::array<char, 65536> buf{};
    bool out_open = true;
    bool err_open = true;
    try {
        while (out_open || err_open) {
            std::vector<pollfd> fds;
            if (out_open) {
                fds.push_back({out_read.get(), POLLIN, 0});
            }
            if (err_open) {
                fds.push_back({err_read.get(), POLLIN, 0});
            }
            if (in_write.get() >= 0) {
                fds.push_back({in_write.get(), POLLOUT, 0});
            }
            if (::poll(fds.data(), fds.size(), -1) < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw std::system_error(errno, std::generic_category(), "poll");
            }
            for (const auto& p : fds) {
                if (p.revents == 0) {
                    continue;
                }
                if (p.fd == in_write.get()) {
                    const auto n = ::write(p.fd, options.input.data() + written, options.input.size() - written);
                    if (n > 0) {
                        written += static_cast<std::size_t>(n);
                    }
                    if (n < 0 && errno != EAGAIN && errno != EINTR) {
                        in_write.reset();
                    } else if (written == options.input.size()) {
                        in_write.reset();
                    }
                    continue;
                }
                const auto n = ::read(p.fd, buf.data(), buf.size());
                if (n < 0 && (errno == EAGAIN || errno == EINTR)) {
                    continue;
                }
                if (n <= 0) {
                    (p.fd == out_read.get() ? out_open : err_open) = false;
                    continue;
                }
                const std::string_view chunk{buf.data(), static_cast<std::size_t>(n)};
                if (p.fd == out_read.get()) {
                    if (options.on_stdout) {
                        options.on_stdout(chunk);
                    } else {
                        result.out.append(chunk);
                    }
                } else {
                    result.err.append(chunk);
                }
            }
        }
    } catch (...) {
        ::kill(pid, SIGKILL);
        (void)reap();
        throw;
    }
    in_write.reset();

    const int status = reap();
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return result;
}

}  // namespace repopulse::ingest
