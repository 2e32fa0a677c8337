#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "domain.hpp"
#include "json_io.hpp"
#include "persistence.hpp"
#include "recommender.hpp"

namespace stprec::eval {

// ---------------------------------------------------------------------------
// Counter-based pseudo-random draws.
//
// Every draw is a pure function of (seed, stream, entity, index):
//   h = mix(seed); h = mix(h ^ stream); h = mix(h ^ entity); h = mix(h ^ index)
//   uniform = (h >> 11) * 2^-53
// where mix is the SplitMix64 finalizer. No generator state is carried, so
// populations can be regenerated from any language.

inline std::uint64_t mix64(std::uint64_t x)
{
    std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

enum Stream : std::uint64_t { interests_stream = 1, tags_stream = 2, likes_stream = 3 };

inline std::uint64_t draw_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t entity,
                               std::uint64_t index)
{
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ stream);
    h = mix64(h ^ entity);
    return mix64(h ^ index);
}

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t entity,
                      std::uint64_t index)
{
    return static_cast<double>(draw_bits(seed, stream, entity, index) >> 11) * 0x1.0p-53;
}

/// `count` distinct positions from [0, n) by a partial Fisher-Yates shuffle
/// driven by draws (stream, entity, 0..count-1).
inline std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t count,
                                                std::uint64_t seed, std::uint64_t stream,
                                                std::uint64_t entity)
{
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        auto span = n - i;
        auto pick = i + std::min(span - 1, static_cast<std::size_t>(
                                               uniform(seed, stream, entity, i) *
                                               static_cast<double>(span)));
        std::swap(pool[i], pool[pick]);
    }
    pool.resize(count);
    return pool;
}

// ---------------------------------------------------------------------------

struct SyntheticSpec {
    std::uint64_t seed = 0;
    std::size_t n_faculty = 0;
    std::size_t n_items = 0;
    std::size_t n_clusters = 1;
    double like_prob = 0.0;
    std::size_t vocab_per_cluster = 6;
    std::size_t interests_per_faculty = 3;
    std::size_t tags_per_item = 2;

    void validate() const
    {
        std::vector<std::string> problems;
        if (n_clusters < 1)
            problems.emplace_back("n_clusters must be >= 1");
        if (n_faculty < 1 || n_items < 1)
            problems.emplace_back("n_faculty and n_items must be positive");
        if (n_faculty < n_clusters)
            problems.emplace_back("n_faculty must be >= n_clusters");
        if (!(like_prob >= 0.0 && like_prob <= 1.0))
            problems.emplace_back("like_prob must be within [0,1]");
        if (vocab_per_cluster < 1 || interests_per_faculty < 1 || tags_per_item < 1)
            problems.emplace_back("vocabulary, interest and tag counts must be positive");
        if (interests_per_faculty > vocab_per_cluster || tags_per_item > vocab_per_cluster)
            problems.emplace_back("interests/tags per entity cannot exceed vocab_per_cluster");
        if (!problems.empty())
            throw Error(ErrorCode::validation_failed, "invalid synthetic spec", std::move(problems));
    }
};

namespace detail {

inline std::string padded(const char* prefix, std::size_t n)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04zu", prefix, n);
    return buf;
}

inline std::string cluster_token(std::size_t cluster, std::size_t word)
{
    return "c" + std::to_string(cluster) + "-topic-" + std::to_string(word);
}

inline Timestamp synthetic_epoch()
{
    return std::chrono::sys_days{std::chrono::year{2025} / 1 / 1};
}

} // namespace detail

/// Clustered synthetic population; a pure function of `spec`.
///
/// Cluster c owns tokens "c<c>-topic-<w>" and college "college-<c>".
/// Faculty i and item j join cluster i mod C and j mod C. Faculty draw
/// interests and items draw tags from their cluster vocabulary. Faculty
/// like same-cluster items with probability like_prob, others with
/// like_prob/10.
inline StateSnapshot generate_population(const SyntheticSpec& spec)
{
    spec.validate();
    const Timestamp epoch = detail::synthetic_epoch();
    const std::chrono::sys_days first_start{std::chrono::year{2030} / 1 / 1};

    StateSnapshot s;
    for (std::size_t i = 0; i < spec.n_faculty; ++i) {
        std::size_t cluster = i % spec.n_clusters;
        FacultyProfile f;
        f.faculty_id = detail::padded("f", i);
        f.name = detail::padded("Faculty ", i);
        f.college = "college-" + std::to_string(cluster);
        for (auto w : sample_distinct(spec.vocab_per_cluster, spec.interests_per_faculty,
                                      spec.seed, interests_stream, i))
            f.interests.insert(detail::cluster_token(cluster, w));
        f.created_at = epoch;
        f.updated_at = epoch;
        s.faculty.push_back(std::move(f));
    }

    std::vector<std::size_t> item_cluster;
    for (std::size_t j = 0; j < spec.n_items; ++j) {
        std::size_t cluster = j % spec.n_clusters;
        StpItem item;
        item.title = "Cluster " + std::to_string(cluster) + " Program " + std::to_string(j);
        item.start_date = Date{first_start + std::chrono::days{static_cast<int>(j)}};
        item.stp_id = derive_stp_id(item.title, item.start_date);
        item.provider = "Synthetic Provider";
        for (auto w : sample_distinct(spec.vocab_per_cluster, spec.tags_per_item, spec.seed,
                                      tags_stream, j))
            item.tags.insert(detail::cluster_token(cluster, w));
        item.source = "synthetic";
        item.ingested_at = epoch;
        s.items.push_back(std::move(item));
        item_cluster.push_back(cluster);
    }

    for (std::size_t i = 0; i < spec.n_faculty; ++i) {
        for (std::size_t j = 0; j < spec.n_items; ++j) {
            bool same = item_cluster[j] == i % spec.n_clusters;
            double p = same ? spec.like_prob : spec.like_prob / 10.0;
            if (uniform(spec.seed, likes_stream, i, j) < p)
                s.likes.push_back({s.faculty[i].faculty_id, s.items[j].stp_id, epoch});
        }
    }
    canonicalize(s);
    return s;
}

// ---------------------------------------------------------------------------
// Reference scorer. Written independently of recommender.hpp and
// similarity.hpp: plain vectors, linear scans, insertion sort.

namespace oracle {

inline std::size_t count_shared(const TokenSet& a, const TokenSet& b)
{
    std::size_t n = 0;
    for (const auto& x : a)
        for (const auto& y : b)
            if (x == y)
                ++n;
    return n;
}

inline double similarity(const FacultyProfile& a, const FacultyProfile& b,
                         const SimilarityParams& p)
{
    const TokenSet* lhs[3] = {&a.programs, &a.interests, &a.expertise};
    const TokenSet* rhs[3] = {&b.programs, &b.interests, &b.expertise};
    const double weights[3] = {p.weight_programs, p.weight_interests, p.weight_expertise};

    double numerator = a.college == b.college ? p.weight_college : 0.0;
    double denominator = p.weight_college;
    for (int c = 0; c < 3; ++c) {
        std::size_t na = lhs[c]->size();
        std::size_t nb = rhs[c]->size();
        if (na == 0 && nb == 0)
            continue;
        std::size_t shared = count_shared(*lhs[c], *rhs[c]);
        double j = double(shared) / double(na + nb - shared);
        numerator += weights[c] * j;
        denominator += weights[c];
    }
    if (denominator <= 0.0)
        return 0.0;
    double v = numerator / denominator;
    return v > 1.0 ? 1.0 : (v < 0.0 ? 0.0 : v);
}

inline bool liked(const std::vector<LikeEvent>& likes, const std::string& fid,
                  const std::string& sid)
{
    for (const auto& l : likes)
        if (l.faculty_id == fid && l.stp_id == sid)
            return true;
    return false;
}

} // namespace oracle

/// Exhaustive reference ranking for small states.
inline std::vector<Recommendation> oracle_recommend(const FacultyProfile& u,
                                                    const StateSnapshot& state,
                                                    const RecommendParams& params,
                                                    const Date& today)
{
    // every other faculty member with positive similarity
    std::vector<Neighbor> all;
    for (const auto& v : state.faculty) {
        if (v.faculty_id == u.faculty_id)
            continue;
        double s = oracle::similarity(u, v, params.similarity);
        if (s > 0.0)
            all.push_back({v.faculty_id, s});
    }
    for (std::size_t i = 1; i < all.size(); ++i) {
        for (std::size_t j = i; j > 0; --j) {
            const auto& a = all[j - 1];
            const auto& b = all[j];
            bool swap = a.similarity < b.similarity ||
                        (a.similarity == b.similarity && b.faculty_id < a.faculty_id);
            if (!swap)
                break;
            std::swap(all[j - 1], all[j]);
        }
    }
    if (all.size() > params.similarity.k_neighbors)
        all.resize(params.similarity.k_neighbors);

    std::vector<std::string> terms(u.programs.begin(), u.programs.end());
    terms.insert(terms.end(), u.interests.begin(), u.interests.end());
    terms.insert(terms.end(), u.expertise.begin(), u.expertise.end());
    terms.push_back(u.college);

    struct Row {
        Recommendation rec;
        Date start;
    };
    std::vector<Row> rows;
    for (const auto& item : state.items) {
        if (oracle::liked(state.likes, u.faculty_id, item.stp_id))
            continue;
        bool attended = false;
        for (const auto& a : state.attendance)
            attended = attended || (a.faculty_id == u.faculty_id && a.stp_id == item.stp_id);
        if (attended)
            continue;
        if (!params.include_past_items && item.start_date < today)
            continue;

        Recommendation r;
        r.stp_id = item.stp_id;
        for (const auto& tag : item.tags)
            if (std::find(terms.begin(), terms.end(), tag) != terms.end())
                r.matched_terms.push_back(tag);
        r.content_component =
            item.tags.empty() ? 0.0 : double(r.matched_terms.size()) / double(item.tags.size());

        double num = 0.0, den = 0.0;
        for (const auto& n : all) {
            den += n.similarity;
            if (oracle::liked(state.likes, n.faculty_id, item.stp_id)) {
                num += n.similarity;
                r.contributing_neighbors.push_back(n);
            }
        }
        r.collab_component = den == 0.0 ? 0.0 : num / den;
        double score = params.alpha * r.content_component + (1.0 - params.alpha) * r.collab_component;
        r.score = score > 1.0 ? 1.0 : (score < 0.0 ? 0.0 : score);
        if (r.score == 0.0)
            continue;
        rows.push_back({std::move(r), item.start_date});
    }

    for (std::size_t i = 1; i < rows.size(); ++i) {
        for (std::size_t j = i; j > 0; --j) {
            const auto& a = rows[j - 1];
            const auto& b = rows[j];
            bool swap = false;
            if (a.rec.score != b.rec.score)
                swap = a.rec.score < b.rec.score;
            else if (a.start != b.start)
                swap = b.start < a.start;
            else
                swap = b.rec.stp_id < a.rec.stp_id;
            if (!swap)
                break;
            std::swap(rows[j - 1], rows[j]);
        }
    }

    std::vector<Recommendation> out;
    for (std::size_t i = 0; i < rows.size() && i < params.limit; ++i)
        out.push_back(rows[i].rec);
    return out;
}

// ---------------------------------------------------------------------------

struct EvalResult {
    std::size_t k = 0;
    double hit_rate = 0.0;
    double random_baseline = 0.0;
    double lift = 0.0;
    std::size_t n_trials = 0;
};

inline json to_json(const EvalResult& r)
{
    return json{{"k", r.k},
                {"hit_rate", r.hit_rate},
                {"random_baseline", r.random_baseline},
                {"lift", r.lift},
                {"n_trials", r.n_trials}};
}

/// Leave-one-out hit-rate@k. For every faculty member with >= 2 likes the
/// like with the smallest stp_id is hidden and the user's feed (past items
/// included, limit k) is checked for it.
inline EvalResult leave_one_out(const StateSnapshot& state, RecommendParams params, std::size_t k)
{
    if (k < 1)
        throw Error(ErrorCode::validation_failed, "k must be >= 1");
    params.limit = k;
    params.include_past_items = true;
    params.validate();

    std::size_t hits = 0;
    std::size_t trials = 0;
    double candidate_total = 0.0;
    for (const auto& u : state.faculty) {
        std::vector<std::string> mine;
        for (const auto& l : state.likes)
            if (l.faculty_id == u.faculty_id)
                mine.push_back(l.stp_id);
        if (mine.size() < 2)
            continue;
        const std::string hidden = *std::min_element(mine.begin(), mine.end());

        std::vector<LikeEvent> likes;
        likes.reserve(state.likes.size());
        for (const auto& l : state.likes)
            if (!(l.faculty_id == u.faculty_id && l.stp_id == hidden))
                likes.push_back(l);

        std::set<std::string> excluded(mine.begin(), mine.end());
        excluded.erase(hidden);
        for (const auto& a : state.attendance)
            if (a.faculty_id == u.faculty_id)
                excluded.insert(a.stp_id);
        std::size_t candidates = 0;
        for (const auto& item : state.items)
            if (!excluded.contains(item.stp_id))
                ++candidates;

        auto feed = recommend(u, state.items, state.faculty, likes, state.attendance, params, Date{});
        bool hit = std::any_of(feed.begin(), feed.end(),
                               [&](const Recommendation& r) { return r.stp_id == hidden; });
        hits += hit ? 1 : 0;
        ++trials;
        candidate_total += static_cast<double>(candidates);
    }
    if (trials == 0)
        throw Error(ErrorCode::validation_failed, "insufficient likes");

    EvalResult r;
    r.k = k;
    r.n_trials = trials;
    r.hit_rate = static_cast<double>(hits) / static_cast<double>(trials);
    double mean_candidates = candidate_total / static_cast<double>(trials);
    r.random_baseline =
        mean_candidates > 0.0 ? std::min(1.0, static_cast<double>(k) / mean_candidates) : 0.0;
    r.lift = r.random_baseline > 0.0 ? r.hit_rate / r.random_baseline : 0.0;
    return r;
}

} // namespace stprec::eval
