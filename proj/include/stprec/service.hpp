#pragma once

#include <charconv>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"

#include "config.hpp"
#include "feed.hpp"
#include "ingestion.hpp"
#include "json_io.hpp"
#include "persistence.hpp"
#include "report.hpp"

namespace stprec {

inline int http_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::validation_failed: return 400;
    case ErrorCode::duplicate: return 409;
    case ErrorCode::parse_error: return 400;
    case ErrorCode::unsupported_schema: return 400;
    case ErrorCode::io_error: return 500;
    case ErrorCode::internal: return 500;
    }
    return 500;
}

/// Body of every non-2xx response.
inline json api_error_json(ErrorCode code, std::string_view message,
                           const std::vector<std::string>& details = {})
{
    // io/schema failures are reported to clients as internal/parse errors
    std::string_view wire = to_string(code);
    if (code == ErrorCode::io_error)
        wire = "internal";
    if (code == ErrorCode::unsupported_schema)
        wire = "parse_error";
    json body{{"status", http_status(code)}, {"code", wire}, {"message", message}};
    if (!details.empty())
        body["details"] = details;
    return body;
}

/// HTTP/JSON front end over a StateStore.
///
/// Reads take the current immutable snapshot; writes go through
/// StateStore::mutate, which serializes writers and publishes atomically.
class Service {
public:
    using TodayFn = std::function<Date()>;

    Service(StateStore& store, ingestion::TagVocabulary vocab, RecommendParams defaults,
            TodayFn today = today_utc)
        : store_(store), vocab_(std::move(vocab)), defaults_(defaults), today_(std::move(today))
    {
        defaults_.validate();
    }

    void install(httplib::Server& server)
    {
        server.set_exception_handler(
            [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
                try {
                    std::rethrow_exception(ep);
                } catch (const Error& e) {
                    send_error(res, e);
                } catch (const std::exception& e) {
                    send_error(res, Error(ErrorCode::internal, e.what()));
                } catch (...) {
                    send_error(res, Error(ErrorCode::internal, "unknown error"));
                }
            });
        server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
            if (!res.body.empty())
                return;
            if (res.status == 404)
                send_error(res, Error(ErrorCode::not_found, "no route for " + req.method + " " +
                                                                 req.path));
            else if (res.status >= 400)
                send_error(res, Error(res.status >= 500 ? ErrorCode::internal
                                                        : ErrorCode::validation_failed,
                                      "request failed"),
                           res.status);
        });

        server.Get("/api/health", [this](const auto&, auto& res) { health(res); });

        server.Get("/api/faculty", [this](const auto&, auto& res) { list_faculty(res); });
        server.Post("/api/faculty", [this](const auto& req, auto& res) { create_faculty(req, res); });
        server.Get(R"(/api/faculty/([^/]+))",
                   [this](const auto& req, auto& res) { get_faculty(req.matches[1], res); });
        server.Put(R"(/api/faculty/([^/]+))",
                   [this](const auto& req, auto& res) { update_faculty(req.matches[1], req, res); });
        server.Get(R"(/api/faculty/([^/]+)/recommendations)",
                   [this](const auto& req, auto& res) { recommendations(req.matches[1], req, res); });
        server.Get(R"(/api/faculty/([^/]+)/likes)",
                   [this](const auto& req, auto& res) { list_likes(req.matches[1], res); });
        server.Post(R"(/api/faculty/([^/]+)/likes)",
                    [this](const auto& req, auto& res) { add_like(req.matches[1], req, res); });
        server.Delete(R"(/api/faculty/([^/]+)/likes/([^/]+))", [this](const auto& req, auto& res) {
            remove_like(req.matches[1], req.matches[2], res);
        });
        server.Post(R"(/api/faculty/([^/]+)/attendance)",
                    [this](const auto& req, auto& res) { add_attendance(req.matches[1], req, res); });

        server.Get("/api/reports/attendance",
                   [this](const auto& req, auto& res) { attendance_report(req, res); });

        server.Post("/api/admin/ingest", [this](const auto& req, auto& res) { ingest(req, res); });
        server.Get("/api/stp", [this](const auto&, auto& res) { list_items(res); });
        server.Get(R"(/api/stp/([^/]+))",
                   [this](const auto& req, auto& res) { get_item(req.matches[1], res); });
    }

    static void send_json(httplib::Response& res, int status, const json& body)
    {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void send_error(httplib::Response& res, const Error& e, int status = 0)
    {
        json body = api_error_json(e.code(), e.what(), e.details());
        if (status != 0)
            body["status"] = status;
        send_json(res, status != 0 ? status : http_status(e.code()), body);
    }

private:
    static json parse_body(const httplib::Request& req)
    {
        try {
            return json::parse(req.body);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::parse_error, std::string("request body is not valid JSON: ") +
                                                    e.what());
        }
    }

    static std::vector<std::string> string_list(const json& body, const char* field)
    {
        auto it = body.find(field);
        if (it == body.end() || it->is_null())
            return {};
        if (it->is_string()) {
            // comma-separated convenience form
            std::vector<std::string> out;
            std::string s = it->get<std::string>();
            std::size_t start = 0;
            while (start <= s.size()) {
                auto comma = s.find(',', start);
                auto piece = s.substr(start, comma == std::string::npos ? std::string::npos
                                                                        : comma - start);
                if (normalize_token(piece))
                    out.push_back(piece);
                if (comma == std::string::npos)
                    break;
                start = comma + 1;
            }
            return out;
        }
        if (!it->is_array())
            throw Error(ErrorCode::validation_failed,
                        std::string(field) + " must be an array of strings");
        std::vector<std::string> out;
        for (const auto& e : *it) {
            if (!e.is_string())
                throw Error(ErrorCode::validation_failed,
                            std::string(field) + " must be an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    static std::string string_field(const json& body, const char* field)
    {
        auto it = body.find(field);
        if (it == body.end() || it->is_null())
            return {};
        if (!it->is_string())
            throw Error(ErrorCode::validation_failed, std::string(field) + " must be a string");
        return it->get<std::string>();
    }

    static FacultyInput faculty_input(const json& body)
    {
        if (!body.is_object())
            throw Error(ErrorCode::validation_failed, "profile body must be a JSON object");
        FacultyInput in;
        in.name = string_field(body, "name");
        in.college = string_field(body, "college");
        in.programs = string_list(body, "programs");
        in.interests = string_list(body, "interests");
        in.expertise = string_list(body, "expertise");
        return in;
    }

    json profile_json(const StateSnapshot& state, const FacultyProfile& f) const
    {
        json j = to_json(f);
        json liked = json::array();
        for (const auto& l : state.likes)
            if (l.faculty_id == f.faculty_id)
                liked.push_back(l.stp_id);
        j["liked_stp_ids"] = std::move(liked);
        return j;
    }

    void health(httplib::Response& res) const
    {
        auto s = store_.snapshot();
        send_json(res, 200,
                  json{{"status", "ok"},
                       {"schema_version", s->schema_version},
                       {"counts",
                        {{"faculty", s->faculty.size()},
                         {"items", s->items.size()},
                         {"likes", s->likes.size()},
                         {"attendance", s->attendance.size()}}}});
    }

    void list_faculty(httplib::Response& res) const
    {
        auto s = store_.snapshot();
        json arr = json::array();
        for (const auto& f : s->faculty)
            arr.push_back(to_json(f));
        send_json(res, 200, arr);
    }

    void create_faculty(const httplib::Request& req, httplib::Response& res)
    {
        json body = parse_body(req);
        FacultyInput in = faculty_input(body);
        if (auto id = string_field(body, "faculty_id"); !id.empty())
            in.faculty_id = id;
        Timestamp now = store_.now();
        auto profile = store_.mutate([&](Repository& repo) {
            if (in.faculty_id && repo.find_faculty(*in.faculty_id))
                throw Error(ErrorCode::duplicate, "faculty " + *in.faculty_id + " already exists");
            return repo.upsert_faculty(in, now);
        });
        send_json(res, 201, profile_json(*store_.snapshot(), profile));
    }

    void get_faculty(const std::string& id, httplib::Response& res) const
    {
        auto s = store_.snapshot();
        send_json(res, 200, profile_json(*s, Repository(*s).get_faculty(id)));
    }

    void update_faculty(const std::string& id, const httplib::Request& req, httplib::Response& res)
    {
        FacultyInput in = faculty_input(parse_body(req));
        in.faculty_id = id;
        Timestamp now = store_.now();
        auto profile = store_.mutate([&](Repository& repo) {
            repo.get_faculty(id);
            return repo.upsert_faculty(in, now);
        });
        send_json(res, 200, profile_json(*store_.snapshot(), profile));
    }

    static std::optional<std::string> query(const httplib::Request& req, const char* key)
    {
        if (!req.has_param(key))
            return std::nullopt;
        return req.get_param_value(key);
    }

    RecommendParams request_params(const httplib::Request& req) const
    {
        RecommendParams p = defaults_;
        if (auto v = query(req, "limit")) {
            long long n = 0;
            auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), n);
            if (ec != std::errc{} || ptr != v->data() + v->size() || n < 1)
                throw Error(ErrorCode::validation_failed, "limit must be an integer >= 1");
            p.limit = static_cast<std::size_t>(n);
        }
        if (auto v = query(req, "alpha")) {
            std::size_t used = 0;
            double a = 0.0;
            try {
                a = std::stod(*v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != v->size() || !(a >= 0.0 && a <= 1.0))
                throw Error(ErrorCode::validation_failed, "alpha must be a number within [0,1]");
            p.alpha = a;
        }
        if (auto v = query(req, "include_past")) {
            if (*v == "true" || *v == "1")
                p.include_past_items = true;
            else if (*v == "false" || *v == "0")
                p.include_past_items = false;
            else
                throw Error(ErrorCode::validation_failed, "include_past must be true or false");
        }
        return p;
    }

    void recommendations(const std::string& id, const httplib::Request& req,
                         httplib::Response& res) const
    {
        auto s = store_.snapshot();
        Repository(*s).get_faculty(id);
        RecommendParams p = request_params(req);
        auto recs = recommend_for(*s, id, p, today_());
        send_json(res, 200, feed_json(*s, id, recs));
    }

    void list_likes(const std::string& id, httplib::Response& res) const
    {
        auto s = store_.snapshot();
        Repository repo(*s);
        repo.get_faculty(id);
        json arr = json::array();
        for (const auto& l : s->likes)
            if (l.faculty_id == id)
                arr.push_back(to_json(l));
        send_json(res, 200, arr);
    }

    void add_like(const std::string& id, const httplib::Request& req, httplib::Response& res)
    {
        json body = parse_body(req);
        if (!body.is_object())
            throw Error(ErrorCode::validation_failed, "like body must be a JSON object");
        std::string stp_id = string_field(body, "stp_id");
        if (stp_id.empty())
            throw Error(ErrorCode::validation_failed, "stp_id is required");
        Timestamp now = store_.now();
        auto like = store_.mutate([&](Repository& repo) { return repo.add_like(id, stp_id, now); });
        send_json(res, 201, to_json(like));
    }

    void remove_like(const std::string& id, const std::string& stp_id, httplib::Response& res)
    {
        store_.mutate([&](Repository& repo) { repo.remove_like(id, stp_id); });
        res.status = 204;
    }

    void add_attendance(const std::string& id, const httplib::Request& req, httplib::Response& res)
    {
        json body = parse_body(req);
        if (!body.is_object())
            throw Error(ErrorCode::validation_failed, "attendance body must be a JSON object");
        AttendanceRecord rec;
        rec.faculty_id = id;
        rec.stp_id = string_field(body, "stp_id");
        if (rec.stp_id.empty())
            throw Error(ErrorCode::validation_failed, "stp_id is required");
        auto date = parse_date(string_field(body, "date_attended"));
        if (!date)
            throw Error(ErrorCode::validation_failed, "date_attended must be an ISO 8601 date");
        rec.date_attended = *date;
        if (auto remarks = string_field(body, "remarks"); !remarks.empty())
            rec.remarks = remarks;
        auto stored =
            store_.mutate([&](Repository& repo) { return repo.add_attendance(std::move(rec)); });
        send_json(res, 201, to_json(stored));
    }

    void attendance_report(const httplib::Request& req, httplib::Response& res) const
    {
        report::ReportFilter filter;
        if (auto c = query(req, "college"); c && !c->empty())
            filter.college = *c;
        auto date_param = [&](const char* key) -> std::optional<Date> {
            auto v = query(req, key);
            if (!v || v->empty())
                return std::nullopt;
            auto d = parse_date(*v);
            if (!d)
                throw Error(ErrorCode::validation_failed,
                            std::string(key) + " must be an ISO 8601 date");
            return d;
        };
        filter.from = date_param("from");
        filter.to = date_param("to");
        std::string format = query(req, "format").value_or("json");
        if (format != "json" && format != "csv")
            throw Error(ErrorCode::validation_failed, "format must be json or csv");

        auto rows = report::attendance_report(*store_.snapshot(), filter);
        if (format == "csv") {
            res.status = 200;
            res.set_content(report::to_csv(rows), "text/csv; charset=utf-8");
        } else {
            send_json(res, 200, report::to_json(rows));
        }
    }

    void ingest(const httplib::Request& req, httplib::Response& res)
    {
        auto format = ingestion::FeedFormat::detect;
        if (auto f = query(req, "format")) {
            if (*f == "json")
                format = ingestion::FeedFormat::json_array;
            else if (*f == "jsonl")
                format = ingestion::FeedFormat::json_lines;
            else
                throw Error(ErrorCode::validation_failed, "format must be json or jsonl");
        }
        std::string source = query(req, "source").value_or("admin-upload");
        auto report = ingestion::ingest_into(store_, req.body, vocab_, source, format);
        send_json(res, 200, ingestion::to_json(report));
    }

    void list_items(httplib::Response& res) const
    {
        auto s = store_.snapshot();
        json arr = json::array();
        for (const auto& item : s->items)
            arr.push_back(to_json(item));
        send_json(res, 200, arr);
    }

    void get_item(const std::string& id, httplib::Response& res) const
    {
        auto s = store_.snapshot();
        send_json(res, 200, to_json(Repository(*s).get_item(id)));
    }

    StateStore& store_;
    ingestion::TagVocabulary vocab_;
    RecommendParams defaults_;
    TodayFn today_;
};

} // namespace stprec
