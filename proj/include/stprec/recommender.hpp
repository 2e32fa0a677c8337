#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "domain.hpp"
#include "similarity.hpp"

namespace stprec {

struct RecommendParams {
    double alpha = 0.5;  // content weight
    std::size_t limit = 10;
    bool include_past_items = false;
    SimilarityParams similarity;

    void validate() const
    {
        std::vector<std::string> problems;
        if (!(alpha >= 0.0 && alpha <= 1.0))
            problems.emplace_back("alpha must be within [0,1]");
        if (limit < 1)
            problems.emplace_back("limit must be >= 1");
        try {
            similarity.validate();
        } catch (const Error& e) {
            problems.insert(problems.end(), e.details().begin(), e.details().end());
        }
        if (!problems.empty())
            throw Error(ErrorCode::validation_failed, "invalid recommendation parameters",
                        std::move(problems));
    }
};

/// (faculty_id, stp_id) pairs for constant-time "did v like i" lookups.
using LikePairs = std::set<std::pair<std::string, std::string>>;

inline LikePairs index_likes(std::span<const LikeEvent> likes)
{
    LikePairs out;
    for (const auto& like : likes)
        out.emplace(like.faculty_id, like.stp_id);
    return out;
}

inline TokenSet profile_terms(const FacultyProfile& u)
{
    TokenSet terms{u.college};
    terms.insert(u.programs.begin(), u.programs.end());
    terms.insert(u.interests.begin(), u.interests.end());
    terms.insert(u.expertise.begin(), u.expertise.end());
    return terms;
}

inline std::vector<std::string> matched_terms(const TokenSet& terms, const StpItem& item)
{
    std::vector<std::string> out;
    std::set_intersection(item.tags.begin(), item.tags.end(), terms.begin(), terms.end(),
                          std::back_inserter(out));
    return out;
}

/// Fraction of the item's tags found among the user's profile terms.
inline double content_score(const TokenSet& terms, const StpItem& item)
{
    if (item.tags.empty())
        return 0.0;
    return static_cast<double>(matched_terms(terms, item).size()) /
           static_cast<double>(item.tags.size());
}

inline double content_score(const FacultyProfile& u, const StpItem& item)
{
    return content_score(profile_terms(u), item);
}

/// Similarity-weighted share of neighbors who liked the item.
inline double collab_score(const StpItem& item, std::span<const Neighbor> neighbors,
                           const LikePairs& likes)
{
    double num = 0.0;
    double den = 0.0;
    for (const auto& n : neighbors) {
        den += n.similarity;
        if (likes.contains({n.faculty_id, item.stp_id}))
            num += n.similarity;
    }
    return den > 0.0 ? num / den : 0.0;
}

inline double collab_score(const FacultyProfile& /*u*/, const StpItem& item,
                           std::span<const Neighbor> neighbors, std::span<const LikeEvent> likes)
{
    return collab_score(item, neighbors, index_likes(likes));
}

/// α·content + (1−α)·collab, clamped into [0,1] against rounding.
inline double blend(double alpha, double content, double collab)
{
    return std::clamp(alpha * content + (1.0 - alpha) * collab, 0.0, 1.0);
}

/// Ranked feed for `user`. Items the user liked or attended, past items
/// (unless requested) and zero-score items are dropped. Order: score desc,
/// start_date asc, stp_id asc; truncated to params.limit.
inline std::vector<Recommendation> recommend(const FacultyProfile& user,
                                             std::span<const StpItem> catalog,
                                             std::span<const FacultyProfile> population,
                                             std::span<const LikeEvent> likes,
                                             std::span<const AttendanceRecord> attendance,
                                             const RecommendParams& params, const Date& today)
{
    const LikePairs like_pairs = index_likes(likes);
    std::set<std::string> seen;
    for (const auto& like : likes)
        if (like.faculty_id == user.faculty_id)
            seen.insert(like.stp_id);
    for (const auto& rec : attendance)
        if (rec.faculty_id == user.faculty_id)
            seen.insert(rec.stp_id);

    const auto neighbors = nearest_neighbors(user, population, params.similarity);
    const auto terms = profile_terms(user);

    struct Scored {
        Recommendation rec;
        const StpItem* item;
    };
    std::vector<Scored> scored;
    for (const auto& item : catalog) {
        if (seen.contains(item.stp_id))
            continue;
        if (!params.include_past_items && item.start_date < today)
            continue;

        Recommendation rec;
        rec.stp_id = item.stp_id;
        rec.matched_terms = matched_terms(terms, item);
        rec.content_component = content_score(terms, item);
        rec.collab_component = collab_score(item, neighbors, like_pairs);
        rec.score = blend(params.alpha, rec.content_component, rec.collab_component);
        if (!(rec.score > 0.0))
            continue;
        for (const auto& n : neighbors)
            if (like_pairs.contains({n.faculty_id, item.stp_id}))
                rec.contributing_neighbors.push_back(n);
        scored.push_back({std::move(rec), &item});
    }

    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.rec.score != b.rec.score)
            return a.rec.score > b.rec.score;
        if (a.item->start_date != b.item->start_date)
            return a.item->start_date < b.item->start_date;
        return a.rec.stp_id < b.rec.stp_id;
    });

    std::vector<Recommendation> out;
    out.reserve(std::min(params.limit, scored.size()));
    for (auto& s : scored) {
        if (out.size() >= params.limit)
            break;
        out.push_back(std::move(s.rec));
    }
    return out;
}

} // namespace stprec
