#include "repopulse/store/document_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace repopulse::store {

namespace fs = std::filesystem;

std::string_view to_string(StoreErrc code) {
    switch (code) {
        case StoreErrc::not_found:
            return "not_found";
        case StoreErrc::invalid_identifier:
            return "invalid_identifier";
        case StoreErrc::illegal_transition:
            return "illegal_transition";
        case StoreErrc::conflict:
            return "conflict";
        case StoreErrc::io:
            return "io";
        case StoreErrc::corrupt:
            return "corrupt";
    }
    return "io";
}

void check_key(std::string_view key) {
    const auto bad = [&] { throw StoreError(StoreErrc::invalid_identifier, "invalid store key: " + std::string(key)); };
    if (key.empty() || key.front() == '/' || key.back() == '/') {
        bad();
    }
    std::size_t start = 0;
    while (start <= key.size()) {
        const auto slash = key.find('/', start);
        const auto seg = key.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
        if (seg.empty() || seg.front() == '.') {
            bad();
        }
        for (const char c : seg) {
            if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.')) {
                bad();
            }
        }
        if (slash == std::string_view::npos) {
            break;
        }
        start = slash + 1;
    }
}

namespace {

[[noreturn]] void io_error(const std::string& what) {
    throw StoreError(StoreErrc::io, what + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view data, const fs::path& p) {
    while (!data.empty()) {
        const auto n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            io_error("write " + p.string());
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

void fsync_dir(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

}  // namespace

FileDocumentStore::FileDocumentStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) {
        throw StoreError(StoreErrc::io, "cannot create store directory " + root_.string() + ": " + ec.message());
    }
}

fs::path FileDocumentStore::path_for(std::string_view key) const {
    check_key(key);
    return root_ / (std::string(key) + ".json");
}

std::optional<std::string> FileDocumentStore::get(std::string_view key) const {
    const auto p = path_for(key);
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        if (!fs::exists(p)) {
            return std::nullopt;
        }
        io_error("open " + p.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void FileDocumentStore::put(std::string_view key, std::string_view document) {
    static std::atomic<unsigned> counter{0};
    const auto p = path_for(key);
    const auto dir = p.parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);
    const auto tmp = dir / ("." + p.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
                            std::to_string(counter.fetch_add(1)));
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) {
        io_error("create " + tmp.string());
    }
    try {
        write_all(fd, document, tmp);
        if (::fsync(fd) != 0) {
            io_error("fsync " + tmp.string());
        }
    } catch (...) {
        ::close(fd);
        fs::remove(tmp, ec);
        throw;
    }
    ::close(fd);
    if (::rename(tmp.c_str(), p.c_str()) != 0) {
        const int saved = errno;
        fs::remove(tmp, ec);
        errno = saved;
        io_error("rename " + p.string());
    }
    fsync_dir(dir);
}

bool FileDocumentStore::remove(std::string_view key) {
    const auto p = path_for(key);
    std::error_code ec;
    const bool removed = fs::remove(p, ec);
    if (ec) {
        throw StoreError(StoreErrc::io, "remove " + p.string() + ": " + ec.message());
    }
    if (removed) {
        fsync_dir(p.parent_path());
    }
    return removed;
}

std::vector<std::string> FileDocumentStore::list(std::string_view prefix) const {
    check_key(prefix);
    const auto dir = root_ / std::string(prefix);
    std::vector<std::string> keys;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        return keys;
    }
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        const auto name = entry.path().filename().string();
        // Skips temporaries (leading dot) and anything else foreign.
        if (!entry.is_regular_file() || name.front() == '.' || !name.ends_with(".json")) {
            continue;
        }
        keys.push_back(std::string(prefix) + "/" + name.substr(0, name.size() - 5));
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

void FileDocumentStore::exclusive(const std::function<void()>& fn) {
    std::lock_guard guard(mutex_);
    if (lock_depth_ == 0) {
        const auto lock_path = root_ / ".lock";
        lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (lock_fd_ < 0) {
            io_error("open " + lock_path.string());
        }
        while (::flock(lock_fd_, LOCK_EX) != 0) {
            if (errno != EINTR) {
                ::close(lock_fd_);
                lock_fd_ = -1;
                io_error("flock " + lock_path.string());
            }
        }
    }
    ++lock_depth_;
    const auto release = [this] {
        if (--lock_depth_ == 0) {
            ::flock(lock_fd_, LOCK_UN);
            ::close(lock_fd_);
            lock_fd_ = -1;
        }
    };
    try {
        fn();
    } catch (...) {
        release();
        throw;
    }
    release();
}

std::optional<std::string> MemoryDocumentStore::get(std::string_view key) const {
    check_key(key);
    std::lock_guard guard(data_mutex_);
    const auto it = docs_.find(key);
    if (it == docs_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void MemoryDocumentStore::put(std::string_view key, std::string_view document) {
    check_key(key);
    std::lock_guard guard(data_mutex_);
    docs_.insert_or_assign(std::string(key), std::string(document));
}

bool MemoryDocumentStore::remove(std::string_view key) {
    check_key(key);
    std::lock_guard guard(data_mutex_);
    const auto it = docs_.find(key);
    if (it == docs_.end()) {
        return false;
    }
    docs_.erase(it);
    return true;
}

std::vector<std::string> MemoryDocumentStore::list(std::string_view prefix) const {
    check_key(prefix);
    const auto p = std::string(prefix) + "/";
    std::lock_guard guard(data_mutex_);
    std::vector<std::string> keys;
    for (auto it = docs_.lower_bound(p); it != docs_.end() && it->first.starts_with(p); ++it) {
        if (it->first.find('/', p.size()) == std::string::npos) {
            keys.push_back(it->first);
        }
    }
    return keys;
}

void MemoryDocumentStore::exclusive(const std::function<void()>& fn) {
    std::lock_guard guard(write_mutex_);
    fn();
}

}  // namespace repopulse::store
