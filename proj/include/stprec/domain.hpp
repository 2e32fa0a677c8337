#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"

namespace stprec {

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_seconds;
using TokenSet = std::set<std::string>;

/// Lowercases, trims, and collapses internal whitespace runs into a single
/// hyphen. Returns nullopt when nothing is left.
inline std::optional<std::string> normalize_token(std::string_view raw)
{
    std::string out;
    out.reserve(raw.size());
    bool pending_gap = false;
    for (char ch : raw) {
        auto uc = static_cast<unsigned char>(ch);
        if (std::isspace(uc)) {
            pending_gap = !out.empty();
            continue;
        }
        if (pending_gap) {
            out.push_back('-');
            pending_gap = false;
        }
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    if (out.empty())
        return std::nullopt;
    return out;
}

inline bool is_normalized_token(std::string_view token)
{
    auto norm = normalize_token(token);
    return norm && *norm == token;
}

/// Normalizes every raw string into a set. Throws validation_failed naming
/// `field` if any entry normalizes to empty.
template <typename Range>
TokenSet normalize_tokens(const Range& raw, std::string_view field)
{
    TokenSet out;
    for (const auto& r : raw) {
        auto token = normalize_token(r);
        if (!token)
            throw Error(ErrorCode::validation_failed,
                        std::string(field) + " contains an empty token");
        out.insert(std::move(*token));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dates and timestamps (ISO 8601, UTC)

inline std::string format_date(const Date& d)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

namespace detail {

inline bool parse_digits(std::string_view s, std::size_t pos, std::size_t n, int& out)
{
    if (pos + n > s.size())
        return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9')
            return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

} // namespace detail

inline std::optional<Date> parse_date(std::string_view s)
{
    int y = 0, m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        return std::nullopt;
    if (!detail::parse_digits(s, 0, 4, y) || !detail::parse_digits(s, 5, 2, m) ||
        !detail::parse_digits(s, 8, 2, d))
        return std::nullopt;
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok())
        return std::nullopt;
    return date;
}

inline std::string format_timestamp(Timestamp t)
{
    auto day = std::chrono::floor<std::chrono::days>(t);
    std::chrono::hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return format_date(Date{day}) + buf;
}

/// Accepts exactly `YYYY-MM-DDTHH:MM:SSZ`.
inline std::optional<Timestamp> parse_timestamp(std::string_view s)
{
    if (s.size() != 20 || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
        return std::nullopt;
    auto date = parse_date(s.substr(0, 10));
    int hh = 0, mm = 0, ss = 0;
    if (!date || !detail::parse_digits(s, 11, 2, hh) || !detail::parse_digits(s, 14, 2, mm) ||
        !detail::parse_digits(s, 17, 2, ss))
        return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 59)
        return std::nullopt;
    return std::chrono::sys_days{*date} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
           std::chrono::seconds{ss};
}

inline Timestamp now_utc()
{
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

inline Date today_utc()
{
    return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

// ---------------------------------------------------------------------------
// Records

struct FacultyProfile {
    std::string faculty_id;
    std::string name;
    std::string college;
    TokenSet programs;
    TokenSet interests;
    TokenSet expertise;
    Timestamp created_at{};
    Timestamp updated_at{};

    bool operator==(const FacultyProfile&) const = default;
};

struct StpItem {
    std::string stp_id;
    std::string title;
    std::string provider;
    Date start_date{};
    std::optional<Date> end_date;
    std::optional<std::string> url;
    std::optional<std::string> description;
    TokenSet tags;
    std::string source;
    Timestamp ingested_at{};

    bool operator==(const StpItem&) const = default;
};

struct LikeEvent {
    std::string faculty_id;
    std::string stp_id;
    Timestamp liked_at{};

    bool operator==(const LikeEvent&) const = default;
};

struct AttendanceRecord {
    std::string faculty_id;
    std::string stp_id;
    Date date_attended{};
    std::optional<std::string> remarks;

    bool operator==(const AttendanceRecord&) const = default;
};

struct Neighbor {
    std::string faculty_id;
    double similarity = 0.0;

    bool operator==(const Neighbor&) const = default;
};

struct Recommendation {
    std::string stp_id;
    double score = 0.0;
    double content_component = 0.0;
    double collab_component = 0.0;
    std::vector<std::string> matched_terms;
    std::vector<Neighbor> contributing_neighbors;
};

/// Dedup identity of a catalog item: normalized title plus start date.
inline std::string dedup_key(std::string_view title, const Date& start)
{
    return normalize_token(title).value_or(std::string{}) + "|" + format_date(start);
}

inline std::string dedup_key(const StpItem& item)
{
    return dedup_key(item.title, item.start_date);
}

/// FNV-1a 64-bit, hex encoded. Used to derive stable item ids.
inline std::string stable_hash_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string derive_stp_id(std::string_view title, const Date& start)
{
    return stable_hash_hex(dedup_key(title, start));
}

} // namespace stprec
