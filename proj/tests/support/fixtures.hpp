#pragma once

// Deterministic synthetic inputs shared by the unit and acceptance suites.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "repopulse/common/time.hpp"
#include "repopulse/metrics/types.hpp"

namespace repopulse::fixtures {

using metrics::CommitDelta;
using metrics::FileHistory;
using metrics::IssueRecord;

/// The column.py history: +793 on 2013-11-27, +7 on 2013-12-01.
inline FileHistory column_py() {
    return FileHistory{"astropy/table/column.py",
                       {CommitDelta{"astropy/table/column.py", make_instant(2013, 11, 27), 793},
                        CommitDelta{"astropy/table/column.py", make_instant(2013, 12, 1), 7}}};
}

/// Random valid history: whole-second timestamps in [start, start + span),
/// prefix sums never negative.
inline FileHistory random_history(std::mt19937_64& rng, const std::string& path, Instant start, Millis span,
                                  int max_commits = 12) {
    std::uniform_int_distribution<int> n_commits(0, max_commits);
    const auto span_s = span.count() / 1000;
    std::uniform_int_distribution<std::int64_t> offset_s(0, std::max<std::int64_t>(span_s - 1, 0));
    std::uniform_int_distribution<std::int64_t> delta(-400, 900);

    std::vector<Instant> times;
    const int n = n_commits(rng);
    for (int i = 0; i < n; ++i) {
        times.push_back(start + Millis{offset_s(rng) * 1000});
    }
    std::sort(times.begin(), times.end());

    FileHistory h{path, {}};
    std::int64_t size = 0;
    for (const auto t : times) {
        auto d = delta(rng);
        if (size + d < 0) {
            d = -size;
        }
        size += d;
        h.deltas.push_back(CommitDelta{path, t, d});
    }
    return h;
}

inline std::vector<IssueRecord> random_issues(std::mt19937_64& rng, int count, Instant start, Millis span) {
    std::uniform_int_distribution<std::int64_t> offset(0, span.count() - 1);
    std::bernoulli_distribution closes(0.6);
    std::vector<IssueRecord> out;
    for (int i = 0; i < count; ++i) {
        const auto opened = start + Millis{offset(rng)};
        std::optional<Instant> closed;
        if (closes(rng)) {
            std::uniform_int_distribution<std::int64_t> life(0, span.count());
            closed = opened + Millis{life(rng)};
        }
        out.push_back(IssueRecord{"#" + std::to_string(i + 1), opened, closed});
    }
    return out;
}

/// Issue stream shaped like the Go tracker around the December 2014 mass
/// closure. Weekly windows starting 2014-11-24, 12-01 and 12-08 see
/// opened 30/34/120 and closed 0/0/7968; open_cumulative at the end of the
/// first week is 9161. 7926 of the closures land on 2014-12-08.
inline std::vector<IssueRecord> go_shaped_issues() {
    std::vector<IssueRecord> out;
    out.reserve(9315);
    const auto history_start = make_instant(2009, 10, 1);
    const auto week1 = make_instant(2014, 11, 24);
    const auto week2 = make_instant(2014, 12, 1);
    const auto week3 = make_instant(2014, 12, 8);
    int next_id = 1;
    const auto add = [&](Instant opened) {
        out.push_back(IssueRecord{std::to_string(next_id++), opened, std::nullopt});
    };

    // 9131 issues before the first window, evenly spread from October 2009.
    const auto before = 9161 - 30;
    const auto pre_span = (week1 - history_start).count();
    for (int i = 0; i < before; ++i) {
        add(history_start + Millis{pre_span * i / before});
    }
    const auto spread = [&](int n, Instant from) {
        const auto span = Millis{7 * kMillisPerDay}.count();
        for (int i = 0; i < n; ++i) {
            add(from + Millis{span * i / n + 3'600'000});
        }
    };
    spread(30, week1);
    spread(34, week2);
    spread(120, week3);

    // Close the 7968 oldest: 7926 on the 8th, the rest spread over 9th..14th.
    for (int i = 0; i < 7968; ++i) {
        auto& issue = out[static_cast<std::size_t>(i)];
        if (i < 7926) {
            issue.closed_at = week3 + Millis{(i % 86'000) * 1000};
        } else {
            issue.closed_at = week3 + Millis{kMillisPerDay} + Millis{(i - 7926) * 3'600'000};
        }
    }
    return out;
}

/// Code base hovering around 650 KLOC through late 2014 so density moves only
/// with the issue stream.
inline std::vector<FileHistory> go_shaped_histories() {
    std::vector<FileHistory> out;
    const auto start = make_instant(2014, 10, 1);
    for (int f = 0; f < 10; ++f) {
        const std::string path = "src/pkg" + std::to_string(f) + "/file.go";
        FileHistory h{path, {}};
        h.deltas.push_back(CommitDelta{path, start + Millis{f * 3'600'000LL}, 65'000});
        for (int week = 1; week < 14; ++week) {
            const auto t = start + Millis{week * 7 * kMillisPerDay + f * 60'000LL};
            h.deltas.push_back(CommitDelta{path, t, (week % 3 == 0) ? -120 : 150});
        }
        out.push_back(std::move(h));
    }
    return out;
}

}  // namespace repopulse::fixtures
