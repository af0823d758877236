#include "repopulse/common/time.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace repopulse {

namespace {

using namespace std::chrono;

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
    if (pos + count > text.size()) {
        throw std::invalid_argument("truncated timestamp: " + std::string(text));
    }
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const char c = text[pos + i];
        if (c < '0' || c > '9') {
            throw std::invalid_argument("expected digit in timestamp: " + std::string(text));
        }
        value = value * 10 + (c - '0');
    }
    pos += count;
    return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
    if (pos >= text.size() || text[pos] != c) {
        throw std::invalid_argument("malformed timestamp: " + std::string(text));
    }
    ++pos;
}

}  // namespace

Instant parse_rfc3339(std::string_view text) {
    std::size_t pos = 0;
    const int y = read_digits(text, pos, 4);
    expect(text, pos, '-');
    const int mo = read_digits(text, pos, 2);
    expect(text, pos, '-');
    const int d = read_digits(text, pos, 2);
    if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) {
        throw std::invalid_argument("malformed timestamp: " + std::string(text));
    }
    ++pos;
    const int h = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int mi = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int s = read_digits(text, pos, 2);

    std::int64_t frac_ms = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        std::int64_t scale = 100;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            frac_ms += (text[pos] - '0') * scale;
            scale /= 10;
            ++pos;
            ++digits;
        }
        if (digits == 0) {
            throw std::invalid_argument("empty fraction in timestamp: " + std::string(text));
        }
    }

    std::int64_t offset_min = 0;
    if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
        ++pos;
    } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        const int sign = text[pos] == '+' ? 1 : -1;
        ++pos;
        const int oh = read_digits(text, pos, 2);
        expect(text, pos, ':');
        const int om = read_digits(text, pos, 2);
        offset_min = sign * (oh * 60 + om);
    } else {
        throw std::invalid_argument("missing zone designator in timestamp: " + std::string(text));
    }
    if (pos != text.size()) {
        throw std::invalid_argument("trailing characters in timestamp: " + std::string(text));
    }

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
        throw std::invalid_argument("out-of-range field in timestamp: " + std::string(text));
    }
    const auto base = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} - minutes{offset_min};
    return time_point_cast<Millis>(base) + Millis{frac_ms};
}

std::string format_rfc3339(Instant t) {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss tod{t - day_point};
    char buf[40];
    const auto ms = tod.subseconds().count();
    if (ms != 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                      static_cast<long>(tod.seconds().count()), static_cast<long>(ms));
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                      static_cast<long>(tod.seconds().count()));
    }
    return buf;
}

Instant make_instant(int y, unsigned mo, unsigned d, unsigned h, unsigned mi, unsigned s) {
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date");
    }
    return time_point_cast<Millis>(sys_days{ymd} + hours{h} + minutes{mi} + seconds{s});
}

Instant SystemClock::now() const { return time_point_cast<Millis>(system_clock::now()); }

void SystemClock::sleep_for(Millis d) { std::this_thread::sleep_for(d); }

}  // namespace repopulse
