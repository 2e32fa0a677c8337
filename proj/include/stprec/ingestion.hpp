#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "domain.hpp"
#include "json_io.hpp"
#include "persistence.hpp"

namespace stprec::ingestion {

/// One STP listing as published in a feed file.
struct FeedRecord {
    std::string title;
    std::string provider;
    Date start_date{};
    std::optional<Date> end_date;
    std::optional<std::string> url;
    std::optional<std::string> description;
    std::vector<std::string> explicit_tags;
};

struct Rejection {
    std::size_t index = 0;
    std::string reason;

    bool operator==(const Rejection&) const = default;
};

struct ParsedFeed {
    std::vector<FeedRecord> records;
    std::vector<std::size_t> indices;  // position of each record in the feed
    std::vector<Rejection> rejections;
    std::size_t total = 0;
};

struct IngestReport {
    std::size_t added = 0;
    std::size_t duplicates_skipped = 0;
    std::vector<Rejection> rejected;
    std::vector<std::string> added_ids;
};

inline json to_json(const IngestReport& r)
{
    json rejected = json::array();
    for (const auto& rej : r.rejected)
        rejected.push_back(json{{"index", rej.index}, {"reason", rej.reason}});
    return json{{"added", r.added},
                {"duplicates_skipped", r.duplicates_skipped},
                {"rejected", std::move(rejected)}};
}

enum class FeedFormat { json_array, json_lines, detect };

/// Tag token -> trigger phrases.
class TagVocabulary {
public:
    using Entries = std::vector<std::pair<std::string, std::vector<std::string>>>;

    TagVocabulary() = default;

    /// Normalizes tags; rejects duplicate tags and empty phrases.
    explicit TagVocabulary(const Entries& raw)
    {
        for (const auto& [tag, phrases] : raw)
            add(tag, phrases);
    }

    void add(std::string_view raw_tag, const std::vector<std::string>& phrases)
    {
        auto tag = normalize_token(raw_tag);
        if (!tag)
            throw Error(ErrorCode::validation_failed, "vocabulary contains an empty tag");
        if (entries_.contains(*tag))
            throw Error(ErrorCode::validation_failed, "vocabulary repeats tag " + *tag);
        std::vector<std::string> triggers;
        for (const auto& p : phrases) {
            auto folded = fold(p);
            if (folded.empty())
                throw Error(ErrorCode::validation_failed, "tag " + *tag + " has an empty trigger");
            triggers.push_back(std::move(folded));
        }
        entries_.emplace(std::move(*tag), std::move(triggers));
    }

    static TagVocabulary from_json(const json& j)
    {
        if (!j.is_object())
            throw Error(ErrorCode::parse_error, "vocabulary must be a JSON object");
        TagVocabulary vocab;
        for (const auto& [tag, phrases] : j.items()) {
            if (!phrases.is_array())
                throw Error(ErrorCode::parse_error, "vocabulary entry " + tag + " must be an array");
            std::vector<std::string> list;
            for (const auto& p : phrases) {
                if (!p.is_string())
                    throw Error(ErrorCode::parse_error,
                                "vocabulary entry " + tag + " must contain strings");
                list.push_back(p.get<std::string>());
            }
            vocab.add(tag, list);
        }
        return vocab;
    }

    static TagVocabulary parse(std::string_view text)
    {
        try {
            return from_json(json::parse(text));
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::parse_error, std::string("vocabulary is not valid JSON: ") + e.what());
        }
    }

    const std::map<std::string, std::vector<std::string>>& entries() const noexcept
    {
        return entries_;
    }

    /// Lowercased with whitespace runs collapsed to one space.
    static std::string fold(std::string_view text)
    {
        std::string out;
        bool gap = false;
        for (char c : text) {
            auto uc = static_cast<unsigned char>(c);
            if (std::isspace(uc)) {
                gap = !out.empty();
                continue;
            }
            if (gap)
                out.push_back(' ');
            gap = false;
            out.push_back(static_cast<char>(std::tolower(uc)));
        }
        return out;
    }

private:
    std::map<std::string, std::vector<std::string>> entries_;
};

namespace detail {

inline bool is_word_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

/// True when `phrase` occurs in `text` (both folded) bounded by non-word
/// characters or the ends of the text.
inline bool contains_phrase(std::string_view text, std::string_view phrase)
{
    for (auto pos = text.find(phrase); pos != std::string_view::npos;
         pos = text.find(phrase, pos + 1)) {
        bool left = pos == 0 || !is_word_char(text[pos - 1]);
        auto end = pos + phrase.size();
        bool right = end == text.size() || !is_word_char(text[end]);
        if (left && right)
            return true;
    }
    return false;
}

inline std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(b, e - b + 1));
}

struct Reject : std::runtime_error {
    explicit Reject(const std::string& reason) : std::runtime_error(reason) {}
};

/// Validates one feed entry; throws Reject with the reason on failure.
inline FeedRecord record_from_json(const json& j)
{
    if (!j.is_object())
        throw Reject{"record is not a JSON object"};

    auto required = [&](const char* field) {
        auto it = j.find(field);
        if (it == j.end() || it->is_null())
            throw Reject{std::string("missing required field: ") + field};
        if (!it->is_string())
            throw Reject{std::string("field ") + field + " must be a string"};
        auto v = trim(it->get<std::string>());
        if (v.empty())
            throw Reject{std::string("missing required field: ") + field};
        return v;
    };
    auto optional = [&](const char* field) -> std::optional<std::string> {
        auto it = j.find(field);
        if (it == j.end() || it->is_null())
            return std::nullopt;
        if (!it->is_string())
            throw Reject{std::string("field ") + field + " must be a string"};
        auto v = trim(it->get<std::string>());
        if (v.empty())
            return std::nullopt;
        return v;
    };

    FeedRecord r;
    r.title = required("title");
    r.provider = required("provider");
    auto start = parse_date(required("start_date"));
    if (!start)
        throw Reject{"field start_date is not a valid ISO 8601 date"};
    r.start_date = *start;
    if (auto end = optional("end_date")) {
        auto d = parse_date(*end);
        if (!d)
            throw Reject{"field end_date is not a valid ISO 8601 date"};
        if (*d < r.start_date)
            throw Reject{"end_date precedes start_date"};
        r.end_date = *d;
    }
    r.url = optional("url");
    r.description = optional("description");
    if (auto it = j.find("explicit_tags"); it != j.end() && !it->is_null()) {
        if (!it->is_array())
            throw Reject{"field explicit_tags must be an array of strings"};
        for (const auto& t : *it) {
            if (!t.is_string())
                throw Reject{"field explicit_tags must be an array of strings"};
            if (!normalize_token(t.get<std::string>()))
                throw Reject{"field explicit_tags contains an empty tag"};
            r.explicit_tags.push_back(t.get<std::string>());
        }
    }
    return r;
}

} // namespace detail

/// Decodes a feed. Individual malformed records are rejected with their
/// index; only an undecodable document fails the whole feed.
inline ParsedFeed parse_feed(std::string_view bytes, FeedFormat format = FeedFormat::detect)
{
    if (format == FeedFormat::detect) {
        auto first = bytes.find_first_not_of(" \t\r\n");
        format = (first != std::string_view::npos && bytes[first] == '[') ? FeedFormat::json_array
                                                                          : FeedFormat::json_lines;
    }

    std::vector<std::pair<std::size_t, std::optional<json>>> entries;  // nullopt = bad line
    std::vector<std::string> line_errors;
    if (format == FeedFormat::json_array) {
        json root;
        try {
            root = json::parse(bytes);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::parse_error, std::string("feed is not valid JSON: ") + e.what());
        }
        if (!root.is_array())
            throw Error(ErrorCode::parse_error, "feed must be a JSON array of records");
        for (std::size_t i = 0; i < root.size(); ++i)
            entries.emplace_back(i, std::move(root[i]));
    } else {
        std::istringstream in{std::string(bytes)};
        std::string line;
        std::size_t index = 0;
        while (std::getline(in, line)) {
            if (detail::trim(line).empty())
                continue;
            try {
                entries.emplace_back(index, json::parse(line));
            } catch (const json::parse_error& e) {
                entries.emplace_back(index, std::nullopt);
                line_errors.push_back(std::string("line is not valid JSON: ") + e.what());
            }
            ++index;
        }
        if (!entries.empty() && line_errors.size() == entries.size())
            throw Error(ErrorCode::parse_error, "feed is neither a JSON array nor JSON lines",
                        line_errors);
    }

    ParsedFeed feed;
    feed.total = entries.size();
    std::size_t bad_line = 0;
    for (auto& [index, value] : entries) {
        if (!value) {
            feed.rejections.push_back({index, line_errors[bad_line++]});
            continue;
        }
        try {
            feed.records.push_back(detail::record_from_json(*value));
            feed.indices.push_back(index);
        } catch (const detail::Reject& e) {
            feed.rejections.push_back({index, e.what()});
        }
    }
    return feed;
}

/// Explicit tags plus every vocabulary tag with a trigger phrase appearing
/// on word boundaries in the title or description (case-insensitive).
inline TokenSet auto_tag(const FeedRecord& record, const TagVocabulary& vocab)
{
    TokenSet tags;
    for (const auto& t : record.explicit_tags)
        if (auto token = normalize_token(t))
            tags.insert(std::move(*token));

    const std::string title = TagVocabulary::fold(record.title);
    const std::string description = TagVocabulary::fold(record.description.value_or(""));
    for (const auto& [tag, triggers] : vocab.entries()) {
        for (const auto& phrase : triggers) {
            if (detail::contains_phrase(title, phrase) ||
                detail::contains_phrase(description, phrase)) {
                tags.insert(tag);
                break;
            }
        }
    }
    return tags;
}

inline StpItem to_item(const FeedRecord& r, const TagVocabulary& vocab, std::string source,
                       Timestamp ingested_at)
{
    StpItem item;
    item.stp_id = derive_stp_id(r.title, r.start_date);
    item.title = r.title;
    item.provider = r.provider;
    item.start_date = r.start_date;
    item.end_date = r.end_date;
    item.url = r.url;
    item.description = r.description;
    item.tags = auto_tag(r, vocab);
    item.source = std::move(source);
    item.ingested_at = ingested_at;
    return item;
}

/// Adds every record whose dedup key is new to `repo`; existing items are
/// never modified. Parse rejections are carried into the report.
inline IngestReport ingest(const ParsedFeed& feed, const TagVocabulary& vocab, Repository& repo,
                           const std::string& source, Timestamp now)
{
    IngestReport report;
    report.rejected = feed.rejections;
    std::set<std::string> keys;
    for (const auto& item : repo.list_items())
        keys.insert(dedup_key(item));

    for (std::size_t i = 0; i < feed.records.size(); ++i) {
        const auto& record = feed.records[i];
        if (!keys.insert(dedup_key(record.title, record.start_date)).second) {
            ++report.duplicates_skipped;
            continue;
        }
        StpItem item = to_item(record, vocab, source, now);
        if (repo.find_item(item.stp_id)) {
            // hash collision with a different dedup key
            report.rejected.push_back({feed.indices[i], "stp_id collision for " + item.stp_id});
            continue;
        }
        report.added_ids.push_back(item.stp_id);
        repo.upsert_item(std::move(item));
        ++report.added;
    }
    std::sort(report.rejected.begin(), report.rejected.end(),
              [](const Rejection& a, const Rejection& b) { return a.index < b.index; });
    return report;
}

/// Parses and ingests a feed into the store as one all-or-nothing write.
inline IngestReport ingest_into(StateStore& store, std::string_view bytes,
                                const TagVocabulary& vocab, const std::string& source,
                                FeedFormat format = FeedFormat::detect)
{
    ParsedFeed feed = parse_feed(bytes, format);
    Timestamp now = store.now();
    return store.mutate([&](Repository& repo) { return ingest(feed, vocab, repo, source, now); });
}

} // namespace stprec::ingestion
