#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "domain.hpp"
#include "json_io.hpp"

namespace stprec {

inline constexpr int kSchemaVersion = 1;

struct StateSnapshot {
    int schema_version = kSchemaVersion;
    std::vector<FacultyProfile> faculty;
    std::vector<StpItem> items;
    std::vector<LikeEvent> likes;
    std::vector<AttendanceRecord> attendance;

    bool operator==(const StateSnapshot&) const = default;
};

namespace detail {

inline auto like_key(const LikeEvent& l) { return std::tie(l.faculty_id, l.stp_id); }

inline auto attendance_key(const AttendanceRecord& a)
{
    return std::tie(a.faculty_id, a.stp_id, a.date_attended, a.remarks);
}

} // namespace detail

/// Sorts every record list into its canonical (id) order.
inline void canonicalize(StateSnapshot& s)
{
    std::sort(s.faculty.begin(), s.faculty.end(),
              [](const auto& a, const auto& b) { return a.faculty_id < b.faculty_id; });
    std::sort(s.items.begin(), s.items.end(),
              [](const auto& a, const auto& b) { return a.stp_id < b.stp_id; });
    std::sort(s.likes.begin(), s.likes.end(), [](const auto& a, const auto& b) {
        return detail::like_key(a) < detail::like_key(b);
    });
    std::sort(s.attendance.begin(), s.attendance.end(), [](const auto& a, const auto& b) {
        return detail::attendance_key(a) < detail::attendance_key(b);
    });
}

inline StateSnapshot canonical(StateSnapshot s)
{
    canonicalize(s);
    return s;
}

/// Every integrity violation in the snapshot; empty when valid.
inline std::vector<std::string> validate(const StateSnapshot& s)
{
    std::vector<std::string> out;
    auto check_tokens = [&](const std::string& owner, const char* field, const TokenSet& set) {
        for (const auto& t : set)
            if (!is_normalized_token(t))
                out.push_back(owner + ": " + field + " token '" + t + "' is not normalized");
    };

    if (s.schema_version != kSchemaVersion)
        out.push_back("unsupported schema_version " + std::to_string(s.schema_version));

    std::set<std::string> faculty_ids;
    for (const auto& f : s.faculty) {
        std::string owner = "faculty " + f.faculty_id;
        if (f.faculty_id.empty())
            out.push_back("faculty with empty faculty_id");
        else if (!faculty_ids.insert(f.faculty_id).second)
            out.push_back("duplicate faculty_id " + f.faculty_id);
        if (f.college.empty())
            out.push_back(owner + ": college is empty");
        else if (!is_normalized_token(f.college))
            out.push_back(owner + ": college token '" + f.college + "' is not normalized");
        check_tokens(owner, "programs", f.programs);
        check_tokens(owner, "interests", f.interests);
        check_tokens(owner, "expertise", f.expertise);
    }

    std::set<std::string> item_ids;
    std::map<std::string, std::string> dedup;
    for (const auto& item : s.items) {
        std::string owner = "item " + item.stp_id;
        if (item.stp_id.empty())
            out.push_back("item with empty stp_id");
        else if (!item_ids.insert(item.stp_id).second)
            out.push_back("duplicate stp_id " + item.stp_id);
        if (!normalize_token(item.title))
            out.push_back(owner + ": title is empty");
        auto [it, inserted] = dedup.emplace(dedup_key(item), item.stp_id);
        if (!inserted)
            out.push_back(owner + ": dedup key '" + it->first + "' already used by item " +
                          it->second);
        if (item.end_date && *item.end_date < item.start_date)
            out.push_back(owner + ": end_date precedes start_date");
        check_tokens(owner, "tags", item.tags);
    }

    std::set<std::pair<std::string, std::string>> like_pairs;
    for (const auto& like : s.likes) {
        std::string pair = "(" + like.faculty_id + ", " + like.stp_id + ")";
        if (!like_pairs.emplace(like.faculty_id, like.stp_id).second)
            out.push_back("duplicate like " + pair);
        if (!faculty_ids.contains(like.faculty_id))
            out.push_back("like " + pair + " references unknown faculty " + like.faculty_id);
        if (!item_ids.contains(like.stp_id))
            out.push_back("like " + pair + " references unknown item " + like.stp_id);
    }

    for (const auto& rec : s.attendance) {
        std::string pair = "(" + rec.faculty_id + ", " + rec.stp_id + ")";
        if (!faculty_ids.contains(rec.faculty_id))
            out.push_back("attendance " + pair + " references unknown faculty " + rec.faculty_id);
        if (!item_ids.contains(rec.stp_id))
            out.push_back("attendance " + pair + " references unknown item " + rec.stp_id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

/// Canonical text form: sorted keys, records in id order, 2-space indent,
/// trailing newline. Equal states serialize to identical bytes.
inline std::string serialize(const StateSnapshot& state)
{
    StateSnapshot s = canonical(state);
    auto list = [](const auto& records) {
        json arr = json::array();
        for (const auto& r : records)
            arr.push_back(to_json(r));
        return arr;
    };
    json root{{"schema_version", s.schema_version},
              {"faculty", list(s.faculty)},
              {"items", list(s.items)},
              {"likes", list(s.likes)},
              {"attendance", list(s.attendance)}};
    return root.dump(2) + "\n";
}

/// Parses and fully validates a snapshot. Every malformed record and every
/// integrity violation is reported together.
inline StateSnapshot deserialize(std::string_view text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse_error, std::string("state file is not valid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw Error(ErrorCode::parse_error, "state file root must be a JSON object");
    auto version = root.find("schema_version");
    if (version == root.end() || !version->is_number_integer())
        throw Error(ErrorCode::parse_error, "state file lacks an integer schema_version");
    if (version->get<int>() != kSchemaVersion)
        throw Error(ErrorCode::unsupported_schema,
                    "unsupported schema_version " + std::to_string(version->get<int>()));

    StateSnapshot s;
    std::vector<std::string> problems;
    auto read = [&](const char* key, auto& target, auto parse) {
        auto it = root.find(key);
        if (it == root.end() || !it->is_array()) {
            problems.push_back(std::string(key) + " must be an array");
            return;
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            try {
                target.push_back(parse((*it)[i]));
            } catch (const Error& e) {
                problems.push_back(std::string(key) + "[" + std::to_string(i) + "]: " + e.what());
            }
        }
    };
    read("faculty", s.faculty, faculty_from_json);
    read("items", s.items, item_from_json);
    read("likes", s.likes, like_from_json);
    read("attendance", s.attendance, attendance_from_json);
    if (!problems.empty())
        throw Error(ErrorCode::parse_error, "state file has malformed records", std::move(problems));

    auto violations = validate(s);
    if (!violations.empty())
        throw Error(ErrorCode::validation_failed, "state file failed validation",
                    std::move(violations));
    canonicalize(s);
    return s;
}

/// Returns nullopt when the file does not exist (fresh start).
inline std::optional<StateSnapshot> load_state(const std::filesystem::path& path)
{
    std::error_code ec;
    if (!std::filesystem::exists(path, ec))
        return std::nullopt;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io_error, "cannot read state file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

/// Hook invoked after the temporary file is fully written and before it is
/// renamed over the target. Throwing from it simulates an interrupted save.
using BeforeRename = std::function<void(const std::filesystem::path& temp)>;

inline void write_atomically(const std::filesystem::path& path, std::string_view bytes,
                             const BeforeRename& before_rename = {})
{
    namespace fs = std::filesystem;
    fs::path temp = path;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::io_error, "cannot open " + temp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            fs::remove(temp, ignored);
            throw Error(ErrorCode::io_error, "failed writing " + temp.string());
        }
    }
    if (before_rename)
        before_rename(temp);
    std::error_code ec;
    fs::rename(temp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(temp, ignored);
        throw Error(ErrorCode::io_error, "cannot replace " + path.string() + ": " + ec.message());
    }
}

inline void save_state(const StateSnapshot& state, const std::filesystem::path& path,
                       const BeforeRename& before_rename = {})
{
    auto violations = validate(state);
    if (!violations.empty())
        throw Error(ErrorCode::validation_failed, "refusing to save an invalid state",
                    std::move(violations));
    write_atomically(path, serialize(state), before_rename);
}

// ---------------------------------------------------------------------------
// Repository: validated mutations over a snapshot kept in canonical order.

/// Raw profile fields as entered by a user; tokens are normalized on upsert.
struct FacultyInput {
    std::optional<std::string> faculty_id;
    std::string name;
    std::string college;
    std::vector<std::string> programs;
    std::vector<std::string> interests;
    std::vector<std::string> expertise;
};

inline bool is_valid_id(std::string_view id)
{
    if (id.empty())
        return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        auto uc = static_cast<unsigned char>(c);
        return std::isalnum(uc) || c == '-' || c == '_' || c == '.';
    });
}

/// Lowercase alphanumeric slug of a display name, words joined by hyphens.
inline std::string slugify(std::string_view name)
{
    std::string out;
    bool gap = false;
    for (char c : name) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            if (gap && !out.empty())
                out.push_back('-');
            out.push_back(static_cast<char>(std::tolower(uc)));
            gap = false;
        } else {
            gap = true;
        }
    }
    return out.empty() ? std::string("faculty") : out;
}

class Repository {
public:
    Repository() = default;
    explicit Repository(StateSnapshot state) : state_(std::move(state)) { canonicalize(state_); }

    const StateSnapshot& state() const noexcept { return state_; }
    StateSnapshot release() && { return std::move(state_); }

    const FacultyProfile& get_faculty(std::string_view id) const
    {
        if (auto* f = find_faculty(id))
            return *f;
        throw Error(ErrorCode::not_found, "unknown faculty " + std::string(id));
    }

    const FacultyProfile* find_faculty(std::string_view id) const
    {
        auto it = std::lower_bound(state_.faculty.begin(), state_.faculty.end(), id,
                                   [](const auto& f, std::string_view k) { return f.faculty_id < k; });
        return it != state_.faculty.end() && it->faculty_id == id ? &*it : nullptr;
    }

    const StpItem& get_item(std::string_view id) const
    {
        if (auto* i = find_item(id))
            return *i;
        throw Error(ErrorCode::not_found, "unknown item " + std::string(id));
    }

    const StpItem* find_item(std::string_view id) const
    {
        auto it = std::lower_bound(state_.items.begin(), state_.items.end(), id,
                                   [](const auto& s, std::string_view k) { return s.stp_id < k; });
        return it != state_.items.end() && it->stp_id == id ? &*it : nullptr;
    }

    const std::vector<FacultyProfile>& list_faculty() const noexcept { return state_.faculty; }
    const std::vector<StpItem>& list_items() const noexcept { return state_.items; }

    std::vector<std::string> likes_of(std::string_view faculty_id) const
    {
        std::vector<std::string> out;
        for (const auto& l : state_.likes)
            if (l.faculty_id == faculty_id)
                out.push_back(l.stp_id);
        return out;
    }

    /// Creates or replaces a profile. Without an id, one is derived from the
    /// name (made unique with a numeric suffix).
    const FacultyProfile& upsert_faculty(const FacultyInput& input, Timestamp now)
    {
        std::vector<std::string> problems;
        auto college = normalize_token(input.college);
        if (!college)
            problems.emplace_back("college must not be empty");
        if (!normalize_token(input.name))
            problems.emplace_back("name must not be empty");
        if (input.faculty_id && !is_valid_id(*input.faculty_id))
            problems.emplace_back("faculty_id must be non-empty and use only [A-Za-z0-9._-]");
        FacultyProfile profile;
        auto tokens = [&](const std::vector<std::string>& raw, const char* field, TokenSet& dst) {
            try {
                dst = normalize_tokens(raw, field);
            } catch (const Error& e) {
                problems.emplace_back(e.what());
            }
        };
        tokens(input.programs, "programs", profile.programs);
        tokens(input.interests, "interests", profile.interests);
        tokens(input.expertise, "expertise", profile.expertise);
        if (!problems.empty())
            throw Error(ErrorCode::validation_failed, "invalid faculty profile", std::move(problems));

        profile.faculty_id = input.faculty_id ? *input.faculty_id : fresh_faculty_id(input.name);
        profile.name = trim(input.name);
        profile.college = *college;
        profile.created_at = now;
        profile.updated_at = now;

        auto it = std::lower_bound(
            state_.faculty.begin(), state_.faculty.end(), profile.faculty_id,
            [](const auto& f, const std::string& k) { return f.faculty_id < k; });
        if (it != state_.faculty.end() && it->faculty_id == profile.faculty_id) {
            profile.created_at = it->created_at;
            *it = std::move(profile);
            return *it;
        }
        return *state_.faculty.insert(it, std::move(profile));
    }

    /// Inserts or replaces an item by stp_id, enforcing dedup and date rules.
    const StpItem& upsert_item(StpItem item)
    {
        std::vector<std::string> problems;
        if (!is_valid_id(item.stp_id))
            problems.emplace_back("stp_id must be non-empty and use only [A-Za-z0-9._-]");
        if (!normalize_token(item.title))
            problems.emplace_back("title must not be empty");
        if (item.end_date && *item.end_date < item.start_date)
            problems.emplace_back("end_date precedes start_date");
        for (const auto& t : item.tags)
            if (!is_normalized_token(t))
                problems.push_back("tag '" + t + "' is not normalized");
        std::string key = dedup_key(item);
        for (const auto& other : state_.items)
            if (other.stp_id != item.stp_id && dedup_key(other) == key)
                problems.push_back("dedup key '" + key + "' already used by item " + other.stp_id);
        if (!problems.empty())
            throw Error(ErrorCode::validation_failed, "invalid item", std::move(problems));

        auto it = std::lower_bound(state_.items.begin(), state_.items.end(), item.stp_id,
                                   [](const auto& s, const std::string& k) { return s.stp_id < k; });
        if (it != state_.items.end() && it->stp_id == item.stp_id) {
            *it = std::move(item);
            return *it;
        }
        return *state_.items.insert(it, std::move(item));
    }

    const LikeEvent& add_like(std::string_view faculty_id, std::string_view stp_id, Timestamp now)
    {
        get_faculty(faculty_id);
        get_item(stp_id);
        LikeEvent like{std::string(faculty_id), std::string(stp_id), now};
        auto it = std::lower_bound(state_.likes.begin(), state_.likes.end(), like,
                                   [](const auto& a, const auto& b) {
                                       return detail::like_key(a) < detail::like_key(b);
                                   });
        if (it != state_.likes.end() && detail::like_key(*it) == detail::like_key(like))
            throw Error(ErrorCode::duplicate, "faculty " + like.faculty_id + " already likes " +
                                                  like.stp_id);
        return *state_.likes.insert(it, std::move(like));
    }

    void remove_like(std::string_view faculty_id, std::string_view stp_id)
    {
        auto it = std::find_if(state_.likes.begin(), state_.likes.end(), [&](const auto& l) {
            return l.faculty_id == faculty_id && l.stp_id == stp_id;
        });
        if (it == state_.likes.end())
            throw Error(ErrorCode::not_found, "faculty " + std::string(faculty_id) +
                                                  " has no like for " + std::string(stp_id));
        state_.likes.erase(it);
    }

    const AttendanceRecord& add_attendance(AttendanceRecord record)
    {
        get_faculty(record.faculty_id);
        get_item(record.stp_id);
        auto it = std::upper_bound(state_.attendance.begin(), state_.attendance.end(), record,
                                   [](const auto& a, const auto& b) {
                                       return detail::attendance_key(a) < detail::attendance_key(b);
                                   });
        return *state_.attendance.insert(it, std::move(record));
    }

private:
    static std::string trim(std::string_view s)
    {
        auto b = s.find_first_not_of(" \t\r\n\f\v");
        if (b == std::string_view::npos)
            return {};
        auto e = s.find_last_not_of(" \t\r\n\f\v");
        return std::string(s.substr(b, e - b + 1));
    }

    std::string fresh_faculty_id(std::string_view name) const
    {
        std::string base = slugify(name);
        std::string id = base;
        for (int n = 2; find_faculty(id); ++n)
            id = base + "-" + std::to_string(n);
        return id;
    }

    StateSnapshot state_;
};

// ---------------------------------------------------------------------------
// StateStore: single-writer, multi-reader access to a file-backed snapshot.

class StateStore {
public:
    using Clock = std::function<Timestamp()>;

    /// An empty path keeps the state in memory only.
    explicit StateStore(std::filesystem::path path, StateSnapshot initial = {},
                        Clock clock = now_utc)
        : path_(std::move(path)),
          current_(std::make_shared<const StateSnapshot>(canonical(std::move(initial)))),
          clock_(std::move(clock))
    {
    }

    /// Loads the file, or starts (and writes) an empty state when absent.
    static std::unique_ptr<StateStore> open(const std::filesystem::path& path, Clock clock = now_utc)
    {
        auto loaded = load_state(path);
        auto store = std::make_unique<StateStore>(path, loaded.value_or(StateSnapshot{}),
                                                  std::move(clock));
        if (!loaded)
            save_state(*store->snapshot(), path);
        return store;
    }

    std::shared_ptr<const StateSnapshot> snapshot() const
    {
        std::lock_guard lock(publish_mutex_);
        return current_;
    }

    Timestamp now() const { return clock_(); }

    /// Runs `fn` against a private copy, persists it, then publishes it. If
    /// `fn` or the save throws, the published state is unchanged.
    template <typename Fn>
    auto mutate(Fn&& fn)
    {
        std::lock_guard writer(writer_mutex_);
        Repository repo(*snapshot());
        if constexpr (std::is_void_v<std::invoke_result_t<Fn, Repository&>>) {
            fn(repo);
            commit(std::move(repo));
        } else {
            auto result = fn(repo);
            commit(std::move(repo));
            return result;
        }
    }

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    void commit(Repository&& repo)
    {
        auto next = std::make_shared<const StateSnapshot>(std::move(repo).release());
        if (!path_.empty())
            save_state(*next, path_);
        std::lock_guard lock(publish_mutex_);
        current_ = std::move(next);
    }

    std::filesystem::path path_;
    mutable std::mutex publish_mutex_;
    std::mutex writer_mutex_;
    std::shared_ptr<const StateSnapshot> current_;
    Clock clock_;
};

} // namespace stprec
