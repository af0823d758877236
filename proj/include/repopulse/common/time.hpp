#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace repopulse {

using Millis = std::chrono::milliseconds;

/// A UTC instant with millisecond precision.
using Instant = std::chrono::sys_time<Millis>;

inline constexpr std::int64_t kMillisPerSecond = 1000;
inline constexpr std::int64_t kMillisPerDay = 86'400'000;

[[nodiscard]] inline constexpr Instant from_epoch_ms(std::int64_t ms) { return Instant{Millis{ms}}; }
[[nodiscard]] inline constexpr std::int64_t epoch_ms(Instant t) { return t.time_since_epoch().count(); }

/// Parses an RFC 3339 timestamp ("2014-12-08T00:00:00Z", optional fractional
/// seconds, "Z" or a numeric offset). Throws std::invalid_argument on malformed
/// input.
[[nodiscard]] Instant parse_rfc3339(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ"; milliseconds are appended only when
/// non-zero so the round trip is lossless.
[[nodiscard]] std::string format_rfc3339(Instant t);

[[nodiscard]] Instant make_instant(int year, unsigned month, unsigned day, unsigned hour = 0,
                                   unsigned minute = 0, unsigned second = 0);

class Clock {
public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual Instant now() const = 0;
    /// Blocks (or pretends to) for the given duration.
    virtual void sleep_for(Millis d) = 0;
};

class SystemClock final : public Clock {
public:
    [[nodiscard]] Instant now() const override;
    void sleep_for(Millis d) override;
};

/// Deterministic clock for tests and pinned runs; sleeping advances time.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Instant start) : now_ms_(epoch_ms(start)) {}

    [[nodiscard]] Instant now() const override { return from_epoch_ms(now_ms_.load()); }
    void sleep_for(Millis d) override { advance(d); }

    void advance(Millis d) { now_ms_.fetch_add(d.count()); }
    void set(Instant t) { now_ms_.store(epoch_ms(t)); }

private:
    std::atomic<std::int64_t> now_ms_;
};

}  // namespace repopulse
