#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "config.hpp"
#include "eval.hpp"
#include "feed.hpp"
#include "ingestion.hpp"
#include "persistence.hpp"
#include "report.hpp"
#include "service.hpp"
#include "survey.hpp"

namespace stprec::cli {

/// Exit codes: 0 success, 1 domain/validation error, 2 I/O or environment.
enum Exit : int { ok = 0, domain_error = 1, env_error = 2 };

namespace detail {

/// Raised for failures that map to exit code 2.
struct EnvFailure : Error {
    using Error::Error;
};

inline void print_error(std::ostream& err, const Error& e)
{
    err << "error: " << e.what() << "\n";
    for (const auto& d : e.details())
        err << "  - " << d << "\n";
}

inline std::string fixed2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string fixed4(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

/// Loads the state file; any failure here is an environment error.
inline StateSnapshot load_or_fail(const std::string& path, bool allow_missing)
{
    try {
        auto s = load_state(path);
        if (!s) {
            if (!allow_missing)
                throw Error(ErrorCode::io_error, "state file " + path + " does not exist");
            return StateSnapshot{};
        }
        return *s;
    } catch (const Error& e) {
        throw EnvFailure(e.code(), "cannot load state " + path + ": " + e.what(), e.details());
    }
}

inline Config config_or_default(const std::string& path)
{
    if (path.empty())
        return Config{};
    try {
        return Config::load(path);
    } catch (const Error& e) {
        throw EnvFailure(e.code(), e.what(), e.details());
    }
}

inline std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width)
        s.append(width - s.size(), ' ');
    return s;
}

inline ingestion::TagVocabulary load_vocab(const std::string& path)
{
    if (path.empty())
        return {};
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw EnvFailure(e.code(), e.what());
    }
    return ingestion::TagVocabulary::parse(text);
}

} // namespace detail

/// Shared options; `data` falls back to $STP_DATA, then the config file,
/// then ./stp_state.json.
struct Options {
    std::string data;
    std::string config;
    std::string format = "table";

    // serve
    int port = -1;
    std::string host = "0.0.0.0";
    std::string vocab;

    // ingest
    std::string feed;
    std::string feed_format = "auto";
    std::string source;

    // recommend
    std::string faculty;
    std::size_t limit = 0;
    std::optional<double> alpha;
    bool include_past = false;
    std::string today;

    // seed
    eval::SyntheticSpec spec;

    // eval
    std::size_t k = 5;

    // report
    std::string college;
    std::string from;
    std::string to;

    // survey
    std::string survey_csv;
    std::string scale = "acceptance";
};

inline std::string resolve_data(const Options& o, const Config& c)
{
    if (!o.data.empty())
        return o.data;
    return c.data_path;
}

// ---------------------------------------------------------------------------

inline int cmd_serve(const Options& o, std::ostream& out, std::ostream& err)
{
    Config cfg = detail::config_or_default(o.config);
    std::string data = resolve_data(o, cfg);
    int port = o.port >= 0 ? o.port : cfg.port;
    std::string vocab_path = !o.vocab.empty() ? o.vocab : cfg.vocab_path.value_or("");

    std::unique_ptr<StateStore> store;
    try {
        store = StateStore::open(data);
    } catch (const Error& e) {
        detail::print_error(err, Error(e.code(), "cannot open state " + data + ": " + e.what(),
                                       e.details()));
        return env_error;
    }
    Service service(*store, detail::load_vocab(vocab_path), cfg.defaults);
    httplib::Server server;
    service.install(server);
    // httplib defaults to SO_REUSEPORT, which lets a second server share a
    // busy port silently; keep only SO_REUSEADDR so a conflict fails to bind
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    if (!server.bind_to_port(o.host, port)) {
        err << "error: cannot bind " << o.host << ":" << port << "\n";
        return env_error;
    }
    out << "serving " << data << " on http://" << o.host << ":" << port << std::endl;
    return server.listen_after_bind() ? ok : env_error;
}

inline int cmd_ingest(const Options& o, std::ostream& out, std::ostream& /*err*/)
{
    Config cfg = detail::config_or_default(o.config);
    std::string data = resolve_data(o, cfg);
    std::string bytes;
    try {
        bytes = read_file(o.feed);
    } catch (const Error& e) {
        throw detail::EnvFailure(e.code(), e.what());
    }
    auto vocab = detail::load_vocab(!o.vocab.empty() ? o.vocab : cfg.vocab_path.value_or(""));
    auto format = ingestion::FeedFormat::detect;
    if (o.feed_format == "json")
        format = ingestion::FeedFormat::json_array;
    else if (o.feed_format == "jsonl")
        format = ingestion::FeedFormat::json_lines;
    std::string source =
        !o.source.empty() ? o.source : std::filesystem::path(o.feed).stem().string();

    StateStore store(data, detail::load_or_fail(data, true));
    ingestion::IngestReport report;
    try {
        report = ingestion::ingest_into(store, bytes, vocab, source, format);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io_error)
            throw detail::EnvFailure(e.code(), e.what());
        throw;
    }
    out << ingestion::to_json(report).dump(2) << "\n";
    return ok;
}

inline int cmd_recommend(const Options& o, std::ostream& out, std::ostream& /*err*/)
{
    Config cfg = detail::config_or_default(o.config);
    std::string data = resolve_data(o, cfg);
    StateSnapshot state = detail::load_or_fail(data, false);

    RecommendParams params = cfg.defaults;
    if (o.limit > 0)
        params.limit = o.limit;
    if (o.alpha)
        params.alpha = *o.alpha;
    params.include_past_items = o.include_past;
    Date today = today_utc();
    if (!o.today.empty()) {
        auto d = parse_date(o.today);
        if (!d)
            throw Error(ErrorCode::validation_failed, "--today must be YYYY-MM-DD");
        today = *d;
    }

    auto recs = recommend_for(state, o.faculty, params, today);
    if (o.format == "json") {
        out << feed_json(state, o.faculty, recs).dump() << "\n";
        return ok;
    }
    Repository index(state);
    if (recs.empty()) {
        out << "no matching programs\n";
        return ok;
    }
    out << detail::pad("#", 4) << detail::pad("score", 8) << detail::pad("content", 9)
        << detail::pad("collab", 8) << detail::pad("start", 12) << "title\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        const auto* item = index.find_item(r.stp_id);
        out << detail::pad(std::to_string(i + 1), 4) << detail::pad(detail::fixed4(r.score), 8)
            << detail::pad(detail::fixed4(r.content_component), 9)
            << detail::pad(detail::fixed4(r.collab_component), 8)
            << detail::pad(item ? format_date(item->start_date) : "", 12)
            << (item ? item->title : r.stp_id) << "\n";
    }
    return ok;
}

inline int cmd_seed(const Options& o, std::ostream& out, std::ostream& /*err*/)
{
    Config cfg = detail::config_or_default(o.config);
    std::string data = resolve_data(o, cfg);
    StateSnapshot s = eval::generate_population(o.spec);
    try {
        save_state(s, data);
    } catch (const Error& e) {
        throw detail::EnvFailure(e.code(), e.what());
    }
    out << json{{"data", data},
                {"faculty", s.faculty.size()},
                {"items", s.items.size()},
                {"likes", s.likes.size()}}
               .dump()
        << "\n";
    return ok;
}

inline int cmd_eval(const Options& o, std::ostream& out, std::ostream& /*err*/)
{
    Config cfg = detail::config_or_default(o.config);
    std::string data = resolve_data(o, cfg);
    StateSnapshot s = detail::load_or_fail(data, false);
    RecommendParams params = cfg.defaults;
    if (o.alpha)
        params.alpha = *o.alpha;
    auto result = eval::leave_one_out(s, params, o.k);
    out << eval::to_json(result).dump() << "\n";
    return ok;
}

inline int cmd_report(const Options& o, std::ostream& out, std::ostream& /*err*/)
{
    Config cfg = detail::config_or_default(o.config);
    std::string data = resolve_data(o, cfg);
    StateSnapshot s = detail::load_or_fail(data, false);
    report::ReportFilter filter;
    if (!o.college.empty())
        filter.college = o.college;
    auto date_flag = [](const std::string& v, const char* name) -> std::optional<Date> {
        if (v.empty())
            return std::nullopt;
        auto d = parse_date(v);
        if (!d)
            throw Error(ErrorCode::validation_failed, std::string(name) + " must be YYYY-MM-DD");
        return d;
    };
    filter.from = date_flag(o.from, "--from");
    filter.to = date_flag(o.to, "--to");
    auto rows = report::attendance_report(s, filter);
    if (o.format == "json") {
        out << report::to_json(rows).dump() << "\n";
    } else if (o.format == "csv") {
        out << report::to_csv(rows);
    } else {
        out << detail::pad("college", 14) << detail::pad("faculty", 24) << detail::pad("date", 12)
            << detail::pad("provider", 24) << "title\n";
        for (const auto& r : rows)
            out << detail::pad(r.college, 14) << detail::pad(r.faculty_name, 24)
                << detail::pad(format_date(r.date_attended), 12) << detail::pad(r.provider, 24)
                << r.item_title << "\n";
    }
    return ok;
}

/// Survey CSV: item text, then frequency counts for answers 1..5. A first
/// row whose counts are not integers, or are exactly the answer labels
/// 1,2,3,4,5, is treated as a header.
inline std::vector<survey::LikertResponseSet> parse_survey_csv(std::string_view text)
{
    auto rows = report::parse_csv(text);
    std::vector<survey::LikertResponseSet> items;
    auto as_count = [](const std::string& s, std::int64_t& v) {
        auto t = s;
        t.erase(0, t.find_first_not_of(" \t"));
        t.erase(t.find_last_not_of(" \t") + 1);
        if (t.empty())
            return false;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        return ec == std::errc{} && ptr == t.data() + t.size();
    };
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string where = "row " + std::to_string(r + 1);
        if (row.size() < 6)
            throw Error(ErrorCode::validation_failed,
                        where + ": expected item text and 5 frequency counts");
        std::vector<std::int64_t> counts;
        bool numeric = true;
        for (std::size_t c = 1; c < row.size(); ++c) {
            std::int64_t v = 0;
            if (!as_count(row[c], v)) {
                numeric = false;
                break;
            }
            counts.push_back(v);
        }
        static const std::vector<std::int64_t> labels{1, 2, 3, 4, 5};
        if (r == 0 && numeric && counts == labels)
            continue;  // header naming the answer values
        if (!numeric) {
            if (r == 0)
                continue;  // header
            throw Error(ErrorCode::validation_failed, where + ": counts must be integers");
        }
        if (counts.size() > 5) {
            throw Error(ErrorCode::validation_failed,
                        where + ": response value " + std::to_string(counts.size()) +
                            " outside 1..5");
        }
        survey::LikertResponseSet item{row[0], {}};
        for (std::size_t v = 0; v < 5; ++v) {
            if (counts[v] < 0)
                throw Error(ErrorCode::validation_failed, where + ": negative frequency count");
            item.counts[v] = counts[v];
        }
        if (item.total() == 0)
            throw Error(ErrorCode::validation_failed, where + ": no responses");
        items.push_back(std::move(item));
    }
    return items;
}

inline int cmd_survey(const Options& o, std::ostream& out, std::ostream& /*err*/)
{
    std::string text;
    try {
        text = read_file(o.survey_csv);
    } catch (const Error& e) {
        throw detail::EnvFailure(e.code(), e.what());
    }
    auto items = parse_survey_csv(text);
    auto table = survey::tabulate(items, survey::scale_by_name(o.scale));

    if (o.format == "json") {
        json rows = json::array();
        for (const auto& r : table.rows)
            rows.push_back(json{{"text", r.text},
                                {"mean", r.mean},
                                {"interpretation", r.interpretation},
                                {"rank", r.rank}});
        out << json{{"scale", o.scale},
                    {"items", std::move(rows)},
                    {"composite_mean", table.composite},
                    {"composite_interpretation", table.composite_interpretation}}
                   .dump()
            << "\n";
    } else if (o.format == "csv") {
        out << report::csv_line({"rank", "item", "mean", "interpretation"});
        for (const auto& r : table.rows)
            out << report::csv_line(
                {std::to_string(r.rank), r.text, detail::fixed2(r.mean), r.interpretation});
        out << report::csv_line({"", "Composite Mean", detail::fixed2(table.composite),
                                 table.composite_interpretation});
    } else {
        out << detail::pad("rank", 6) << detail::pad("mean", 7) << detail::pad("interpretation", 24)
            << "item\n";
        for (const auto& r : table.rows)
            out << detail::pad(std::to_string(r.rank), 6) << detail::pad(detail::fixed2(r.mean), 7)
                << detail::pad(r.interpretation, 24) << r.text << "\n";
        out << "Composite Mean " << detail::fixed2(table.composite) << " "
            << table.composite_interpretation << "\n";
    }
    return ok;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Seminar and training program recommender", "stprec"};
    app.require_subcommand(1);
    Options o;

    auto data_opt = [&](CLI::App* sub) {
        sub->add_option("--data", o.data, "state file (default: $STP_DATA or config data_path)")
            ->envname("STP_DATA");
        sub->add_option("--config", o.config, "JSON config file");
    };
    auto format_opt = [&](CLI::App* sub, std::vector<std::string> choices) {
        sub->add_option("--format", o.format, "output format")
            ->check(CLI::IsMember(std::move(choices)));
    };

    auto* serve = app.add_subcommand("serve", "run the HTTP API");
    data_opt(serve);
    serve->add_option("--port", o.port, "listen port (default: config port)")
        ->check(CLI::Range(0, 65535));
    serve->add_option("--host", o.host, "bind address");
    serve->add_option("--vocab", o.vocab, "tag vocabulary JSON");

    auto* ingest = app.add_subcommand("ingest", "ingest an STP feed file");
    ingest->add_option("feed", o.feed, "feed file (JSON array or JSON lines)")->required();
    ingest->add_option("--vocab", o.vocab, "tag vocabulary JSON");
    ingest->add_option("--feed-format", o.feed_format, "feed format")
        ->check(CLI::IsMember({"auto", "json", "jsonl"}));
    ingest->add_option("--source", o.source, "source label (default: feed file stem)");
    data_opt(ingest);

    auto* recommend = app.add_subcommand("recommend", "print a faculty member's feed");
    recommend->add_option("--faculty", o.faculty, "faculty id")->required();
    recommend->add_option("--limit", o.limit, "maximum entries")->check(CLI::PositiveNumber);
    recommend->add_option("--alpha", o.alpha, "content weight in [0,1]")->check(CLI::Range(0.0, 1.0));
    recommend->add_flag("--include-past", o.include_past, "include items that already started");
    recommend->add_option("--today", o.today, "evaluation date YYYY-MM-DD (default: today UTC)");
    format_opt(recommend, {"table", "json"});
    data_opt(recommend);

    auto* seed = app.add_subcommand("seed", "write a synthetic clustered population");
    seed->add_option("--faculty", o.spec.n_faculty, "number of faculty")->required();
    seed->add_option("--items", o.spec.n_items, "number of items")->required();
    seed->add_option("--clusters", o.spec.n_clusters, "number of clusters")->required();
    seed->add_option("--like-prob", o.spec.like_prob, "same-cluster like probability")->required();
    seed->add_option("--seed", o.spec.seed, "generator seed")->required();
    seed->add_option("--vocab-per-cluster", o.spec.vocab_per_cluster, "tokens per cluster");
    seed->add_option("--interests-per-faculty", o.spec.interests_per_faculty, "interests drawn");
    seed->add_option("--tags-per-item", o.spec.tags_per_item, "tags drawn");
    data_opt(seed);

    auto* evaluate = app.add_subcommand("eval", "leave-one-out hit rate");
    evaluate->add_option("--k", o.k, "cutoff")->check(CLI::PositiveNumber);
    evaluate->add_option("--alpha", o.alpha, "content weight in [0,1]")->check(CLI::Range(0.0, 1.0));
    data_opt(evaluate);

    auto* rep = app.add_subcommand("report", "consolidated attendance report");
    rep->add_option("--college", o.college, "college filter");
    rep->add_option("--from", o.from, "first date YYYY-MM-DD");
    rep->add_option("--to", o.to, "last date YYYY-MM-DD");
    format_opt(rep, {"table", "csv", "json"});
    data_opt(rep);

    auto* sv = app.add_subcommand("survey", "tabulate Likert survey frequencies");
    sv->add_option("csv", o.survey_csv, "CSV: item text, counts for answers 1..5")->required();
    sv->add_option("--scale", o.scale, "interpretation scale")
        ->check(CLI::IsMember({"acceptance", "occurrence"}));
    format_opt(sv, {"table", "csv", "json"});

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return domain_error;
    }

    try {
        if (*serve)
            return cmd_serve(o, out, err);
        if (*ingest)
            return cmd_ingest(o, out, err);
        if (*recommend)
            return cmd_recommend(o, out, err);
        if (*seed)
            return cmd_seed(o, out, err);
        if (*evaluate)
            return cmd_eval(o, out, err);
        if (*rep)
            return cmd_report(o, out, err);
        if (*sv)
            return cmd_survey(o, out, err);
    } catch (const detail::EnvFailure& e) {
        detail::print_error(err, e);
        return env_error;
    } catch (const Error& e) {
        detail::print_error(err, e);
        return e.code() == ErrorCode::io_error ? env_error : domain_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return env_error;
    }
    return domain_error;
}

} // namespace stprec::cli
