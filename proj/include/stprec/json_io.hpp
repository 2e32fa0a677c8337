#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "domain.hpp"

namespace stprec {

using json = nlohmann::json;

namespace detail {

inline json tokens_json(const TokenSet& s)
{
    return json(std::vector<std::string>(s.begin(), s.end()));
}

template <typename T>
json optional_json(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

[[noreturn]] inline void field_error(std::string_view field, std::string_view what)
{
    throw Error(ErrorCode::parse_error, "field " + std::string(field) + " " + std::string(what));
}

inline const json& require(const json& j, const char* field)
{
    if (!j.is_object())
        throw Error(ErrorCode::parse_error, "record is not a JSON object");
    auto it = j.find(field);
    if (it == j.end())
        field_error(field, "is missing");
    return *it;
}

inline std::string get_string(const json& j, const char* field)
{
    const json& v = require(j, field);
    if (!v.is_string())
        field_error(field, "must be a string");
    return v.get<std::string>();
}

inline std::optional<std::string> get_optional_string(const json& j, const char* field)
{
    auto it = j.find(field);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    if (!it->is_string())
        field_error(field, "must be a string or null");
    return it->get<std::string>();
}

inline Date get_date(const json& j, const char* field)
{
    auto d = parse_date(get_string(j, field));
    if (!d)
        field_error(field, "is not an ISO 8601 date");
    return *d;
}

inline std::optional<Date> get_optional_date(const json& j, const char* field)
{
    auto s = get_optional_string(j, field);
    if (!s)
        return std::nullopt;
    auto d = parse_date(*s);
    if (!d)
        field_error(field, "is not an ISO 8601 date");
    return d;
}

inline Timestamp get_timestamp(const json& j, const char* field)
{
    auto t = parse_timestamp(get_string(j, field));
    if (!t)
        field_error(field, "is not a UTC timestamp (YYYY-MM-DDTHH:MM:SSZ)");
    return *t;
}

/// Reads a string array as stored; normalization is checked by validation,
/// not silently applied here.
inline TokenSet get_token_set(const json& j, const char* field)
{
    const json& v = require(j, field);
    if (!v.is_array())
        field_error(field, "must be an array of strings");
    TokenSet out;
    for (const auto& e : v) {
        if (!e.is_string())
            field_error(field, "must be an array of strings");
        out.insert(e.get<std::string>());
    }
    return out;
}

} // namespace detail

inline json to_json(const FacultyProfile& f)
{
    return json{{"faculty_id", f.faculty_id},
                {"name", f.name},
                {"college", f.college},
                {"programs", detail::tokens_json(f.programs)},
                {"interests", detail::tokens_json(f.interests)},
                {"expertise", detail::tokens_json(f.expertise)},
                {"created_at", format_timestamp(f.created_at)},
                {"updated_at", format_timestamp(f.updated_at)}};
}

inline json to_json(const StpItem& s)
{
    return json{{"stp_id", s.stp_id},
                {"title", s.title},
                {"provider", s.provider},
                {"start_date", format_date(s.start_date)},
                {"end_date", s.end_date ? json(format_date(*s.end_date)) : json(nullptr)},
                {"url", detail::optional_json(s.url)},
                {"description", detail::optional_json(s.description)},
                {"tags", detail::tokens_json(s.tags)},
                {"source", s.source},
                {"ingested_at", format_timestamp(s.ingested_at)}};
}

inline json to_json(const LikeEvent& l)
{
    return json{{"faculty_id", l.faculty_id},
                {"stp_id", l.stp_id},
                {"liked_at", format_timestamp(l.liked_at)}};
}

inline json to_json(const AttendanceRecord& a)
{
    return json{{"faculty_id", a.faculty_id},
                {"stp_id", a.stp_id},
                {"date_attended", format_date(a.date_attended)},
                {"remarks", detail::optional_json(a.remarks)}};
}

inline json to_json(const Neighbor& n)
{
    return json{{"faculty_id", n.faculty_id}, {"similarity", n.similarity}};
}

inline json to_json(const Recommendation& r)
{
    json neighbors = json::array();
    for (const auto& n : r.contributing_neighbors)
        neighbors.push_back(to_json(n));
    return json{{"stp_id", r.stp_id},
                {"score", r.score},
                {"content_component", r.content_component},
                {"collab_component", r.collab_component},
                {"matched_terms", r.matched_terms},
                {"contributing_neighbors", std::move(neighbors)}};
}

inline FacultyProfile faculty_from_json(const json& j)
{
    FacultyProfile f;
    f.faculty_id = detail::get_string(j, "faculty_id");
    f.name = detail::get_string(j, "name");
    f.college = detail::get_string(j, "college");
    f.programs = detail::get_token_set(j, "programs");
    f.interests = detail::get_token_set(j, "interests");
    f.expertise = detail::get_token_set(j, "expertise");
    f.created_at = detail::get_timestamp(j, "created_at");
    f.updated_at = detail::get_timestamp(j, "updated_at");
    return f;
}

inline StpItem item_from_json(const json& j)
{
    StpItem s;
    s.stp_id = detail::get_string(j, "stp_id");
    s.title = detail::get_string(j, "title");
    s.provider = detail::get_string(j, "provider");
    s.start_date = detail::get_date(j, "start_date");
    s.end_date = detail::get_optional_date(j, "end_date");
    s.url = detail::get_optional_string(j, "url");
    s.description = detail::get_optional_string(j, "description");
    s.tags = detail::get_token_set(j, "tags");
    s.source = detail::get_string(j, "source");
    s.ingested_at = detail::get_timestamp(j, "ingested_at");
    return s;
}

inline LikeEvent like_from_json(const json& j)
{
    return {detail::get_string(j, "faculty_id"), detail::get_string(j, "stp_id"),
            detail::get_timestamp(j, "liked_at")};
}

inline AttendanceRecord attendance_from_json(const json& j)
{
    return {detail::get_string(j, "faculty_id"), detail::get_string(j, "stp_id"),
            detail::get_date(j, "date_attended"), detail::get_optional_string(j, "remarks")};
}

} // namespace stprec
