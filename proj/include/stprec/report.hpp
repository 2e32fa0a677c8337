#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "domain.hpp"
#include "json_io.hpp"
#include "persistence.hpp"

namespace stprec::report {

struct AttendanceRow {
    std::string faculty_name;
    std::string college;
    std::string item_title;
    std::string provider;
    Date date_attended{};

    bool operator==(const AttendanceRow&) const = default;
};

struct ReportFilter {
    std::optional<std::string> college;  // normalized token
    std::optional<Date> from;            // inclusive
    std::optional<Date> to;              // inclusive
};

inline const std::vector<std::string>& csv_headers()
{
    static const std::vector<std::string> headers{"faculty_name", "college", "item_title",
                                                  "provider", "date_attended"};
    return headers;
}

/// Consolidated attendance, sorted by college, faculty name, then date.
inline std::vector<AttendanceRow> attendance_report(const StateSnapshot& state,
                                                    const ReportFilter& filter)
{
    if (filter.from && filter.to && *filter.to < *filter.from)
        throw Error(ErrorCode::validation_failed, "invalid date range: from is after to");
    std::optional<std::string> college;
    if (filter.college)
        college = normalize_token(*filter.college).value_or("");

    Repository index(state);
    std::vector<AttendanceRow> rows;
    for (const auto& rec : state.attendance) {
        const auto* f = index.find_faculty(rec.faculty_id);
        const auto* item = index.find_item(rec.stp_id);
        if (!f || !item)
            continue;
        if (college && f->college != *college)
            continue;
        if (filter.from && rec.date_attended < *filter.from)
            continue;
        if (filter.to && *filter.to < rec.date_attended)
            continue;
        rows.push_back({f->name, f->college, item->title, item->provider, rec.date_attended});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.college, a.faculty_name, a.date_attended, a.item_title) <
               std::tie(b.college, b.faculty_name, b.date_attended, b.item_title);
    });
    return rows;
}

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view v)
{
    if (v.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(v);
    std::string out = "\"";
    for (char c : v) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string csv_line(const std::vector<std::string>& fields)
{
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            line.push_back(',');
        line += csv_field(fields[i]);
    }
    return line + "\r\n";
}

inline std::string to_csv(const std::vector<AttendanceRow>& rows)
{
    std::string out = csv_line(csv_headers());
    for (const auto& r : rows)
        out += csv_line({r.faculty_name, r.college, r.item_title, r.provider,
                         format_date(r.date_attended)});
    return out;
}

inline json to_json(const std::vector<AttendanceRow>& rows)
{
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"faculty_name", r.faculty_name},
                           {"college", r.college},
                           {"item_title", r.item_title},
                           {"provider", r.provider},
                           {"date_attended", format_date(r.date_attended)}});
    return arr;
}

/// Splits RFC 4180 text into records. Quoted fields may contain commas,
/// doubled quotes and line breaks.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            if (field_started || !field.empty() || !row.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            field_started = false;
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted)
        throw Error(ErrorCode::parse_error, "unterminated quoted CSV field");
    if (field_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace stprec::report
