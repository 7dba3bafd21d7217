#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aclp/csv.hpp"
#include "aclp/error.hpp"

namespace aclp {

using Timestamp = std::int64_t;  // seconds since the Unix epoch

namespace detail {

// Howard Hinnant's days-from-civil; valid far beyond any log we will see.
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

inline bool all_digits(const std::string& s, std::size_t from, std::size_t to) {
    if (to > s.size()) return false;
    for (std::size_t i = from; i < to; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

inline int num(const std::string& s, std::size_t from, std::size_t to) {
    int v = 0;
    for (std::size_t i = from; i < to; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

}  // namespace detail

// "YYYY-MM-DDTHH:MM:SS" with an optional ".mmm" suffix. Milliseconds are
// accepted and truncated; storage is at seconds resolution.
inline Timestamp parse_timestamp(const std::string& s) {
    const bool base_ok = s.size() >= 19 && detail::all_digits(s, 0, 4) && s[4] == '-' &&
                         detail::all_digits(s, 5, 7) && s[7] == '-' &&
                         detail::all_digits(s, 8, 10) && s[10] == 'T' &&
                         detail::all_digits(s, 11, 13) && s[13] == ':' &&
                         detail::all_digits(s, 14, 16) && s[16] == ':' &&
                         detail::all_digits(s, 17, 19);
    bool frac_ok = s.size() == 19;
    if (s.size() > 19)
        frac_ok = s[19] == '.' && s.size() > 20 && detail::all_digits(s, 20, s.size()) &&
                  s.size() <= 20 + 9;
    if (!base_ok || !frac_ok) throw ParseError("malformed timestamp '" + s + "'");
    int y = detail::num(s, 0, 4), mo = detail::num(s, 5, 7), d = detail::num(s, 8, 10);
    int h = detail::num(s, 11, 13), mi = detail::num(s, 14, 16), se = detail::num(s, 17, 19);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        throw ParseError("malformed timestamp '" + s + "'");
    return detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

inline std::string format_timestamp(Timestamp t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    int y, m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.000", y, m, d,
                  static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60));
    return std::string(buf);
}

struct Event {
    std::string activity;
    std::string case_id;
    Timestamp t_start = 0;
    Timestamp t_end = 0;
    std::string resource;   // empty when absent
    std::string lifecycle;  // empty when absent
    std::map<std::string, std::string> extras;

    // Total content order; trace ordering and determinism both rest on it.
    friend bool operator<(const Event& a, const Event& b) {
        auto ka = std::tie(a.t_start, a.t_end, a.activity, a.resource, a.lifecycle, a.extras);
        auto kb = std::tie(b.t_start, b.t_end, b.activity, b.resource, b.lifecycle, b.extras);
        return ka < kb;
    }
    friend bool operator==(const Event& a, const Event& b) {
        return a.activity == b.activity && a.case_id == b.case_id && a.t_start == b.t_start &&
               a.t_end == b.t_end && a.resource == b.resource && a.lifecycle == b.lifecycle &&
               a.extras == b.extras;
    }
};

struct Trace {
    std::string case_id;
    std::vector<Event> events;  // sorted by (t_start, t_end, activity, ...)

    friend bool operator==(const Trace& a, const Trace& b) {
        return a.case_id == b.case_id && a.events == b.events;
    }
};

struct EventLog {
    std::vector<Trace> traces;  // sorted by case_id
    std::vector<std::string> activity_universe;  // sorted, deduplicated

    friend bool operator==(const EventLog& a, const EventLog& b) {
        return a.traces == b.traces && a.activity_universe == b.activity_universe;
    }
};

// Column layout of a log file. Defaults mirror the flight-service export:
// Case,type,Activity,Resource,Timestamp,lifecycle:transition. A single
// timestamp column means instantaneous events (t_start == t_end); a nonempty
// end_col reads a separate end timestamp. Unmapped columns land in extras.
struct LogFormat {
    std::string case_col = "Case";
    std::string activity_col = "Activity";
    std::string timestamp_col = "Timestamp";
    std::string end_col;  // optional
    std::string resource_col = "Resource";
    std::string lifecycle_col = "lifecycle:transition";
};

inline EventLog parse_log(std::istream& in, const LogFormat& fmt = LogFormat()) {
    std::vector<std::string> header;
    if (!csv_read_record(in, header)) throw ParseError("empty log");

    auto col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int c_case = col(fmt.case_col);
    const int c_act = col(fmt.activity_col);
    const int c_ts = col(fmt.timestamp_col);
    if (c_case < 0) throw ParseError("missing required column '" + fmt.case_col + "'");
    if (c_act < 0) throw ParseError("missing required column '" + fmt.activity_col + "'");
    if (c_ts < 0) throw ParseError("missing required column '" + fmt.timestamp_col + "'");
    const int c_end = fmt.end_col.empty() ? -1 : col(fmt.end_col);
    if (!fmt.end_col.empty() && c_end < 0)
        throw ParseError("missing required column '" + fmt.end_col + "'");
    const int c_res = fmt.resource_col.empty() ? -1 : col(fmt.resource_col);
    const int c_life = fmt.lifecycle_col.empty() ? -1 : col(fmt.lifecycle_col);

    std::map<std::string, std::vector<Event>> by_case;
    std::vector<std::string> row;
    long row_no = 1;  // header was row 1
    bool any = false;
    while (csv_read_record(in, row)) {
        ++row_no;
        if (row.size() == 1 && row[0].empty()) continue;  // blank line
        auto field = [&](int idx) -> std::string {
            return (idx >= 0 && static_cast<std::size_t>(idx) < row.size())
                       ? row[static_cast<std::size_t>(idx)]
                       : std::string();
        };
        Event e;
        e.case_id = field(c_case);
        e.activity = field(c_act);
        const std::string ts = field(c_ts);
        if (e.case_id.empty() || e.activity.empty() || ts.empty())
            throw ParseError("row " + std::to_string(row_no) +
                             ": missing required Case/Activity/Timestamp value");
        try {
            e.t_start = parse_timestamp(ts);
            e.t_end = c_end >= 0 ? parse_timestamp(field(c_end)) : e.t_start;
        } catch (const ParseError& pe) {
            throw ParseError("row " + std::to_string(row_no) + ": " + pe.what());
        }
        if (e.t_end < e.t_start)
            throw ParseError("row " + std::to_string(row_no) + ": event ends before it starts");
        e.resource = field(c_res);
        e.lifecycle = field(c_life);
        for (std::size_t i = 0; i < header.size() && i < row.size(); ++i) {
            const int ii = static_cast<int>(i);
            if (ii == c_case || ii == c_act || ii == c_ts || ii == c_end || ii == c_res ||
                ii == c_life)
                continue;
            e.extras[header[i]] = row[i];
        }
        by_case[e.case_id].push_back(std::move(e));
        any = true;
    }
    if (!any) throw ParseError("empty log");

    EventLog log;
    for (auto& [cid, evs] : by_case) {
        std::sort(evs.begin(), evs.end());
        log.traces.push_back(Trace{cid, std::move(evs)});
    }
    std::vector<std::string> acts;
    for (const auto& tr : log.traces)
        for (const auto& e : tr.events) acts.push_back(e.activity);
    std::sort(acts.begin(), acts.end());
    acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
    log.activity_universe = std::move(acts);
    return log;
}

inline void serialize_log(std::ostream& out, const EventLog& log,
                          const LogFormat& fmt = LogFormat()) {
    // Collect extra columns in first-seen-sorted order for a stable header.
    std::vector<std::string> extra_cols;
    for (const auto& tr : log.traces)
        for (const auto& e : tr.events)
            for (const auto& [k, v] : e.extras) extra_cols.push_back(k);
    std::sort(extra_cols.begin(), extra_cols.end());
    extra_cols.erase(std::unique(extra_cols.begin(), extra_cols.end()), extra_cols.end());

    std::vector<std::string> header{fmt.case_col, fmt.activity_col, fmt.timestamp_col};
    if (!fmt.end_col.empty()) header.push_back(fmt.end_col);
    if (!fmt.resource_col.empty()) header.push_back(fmt.resource_col);
    if (!fmt.lifecycle_col.empty()) header.push_back(fmt.lifecycle_col);
    header.insert(header.end(), extra_cols.begin(), extra_cols.end());
    csv_write_record(out, header);

    for (const auto& tr : log.traces) {
        for (const auto& e : tr.events) {
            std::vector<std::string> row{tr.case_id, e.activity, format_timestamp(e.t_start)};
            if (!fmt.end_col.empty()) row.push_back(format_timestamp(e.t_end));
            if (!fmt.resource_col.empty()) row.push_back(e.resource);
            if (!fmt.lifecycle_col.empty()) row.push_back(e.lifecycle);
            for (const auto& c : extra_cols) {
                auto it = e.extras.find(c);
                row.push_back(it == e.extras.end() ? std::string() : it->second);
            }
            csv_write_record(out, row);
        }
    }
}

// count(A,B) = number of adjacent positions across traces where B immediately
// follows A; includes self-loops (A,A).
inline std::map<std::pair<std::string, std::string>, long> directly_follows_counts(
    const EventLog& log) {
    std::map<std::pair<std::string, std::string>, long> counts;
    for (const auto& tr : log.traces)
        for (std::size_t i = 0; i + 1 < tr.events.size(); ++i)
            ++counts[{tr.events[i].activity, tr.events[i + 1].activity}];
    return counts;
}

}  // namespace aclp
