#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "domain.hpp"

namespace stprec {

/// Per-attribute weights and neighborhood size for profile matching.
struct SimilarityParams {
    double weight_college = 0.2;
    double weight_programs = 0.3;
    double weight_interests = 0.3;
    double weight_expertise = 0.2;
    std::size_t k_neighbors = 5;

    /// Throws validation_failed unless weights are non-negative, sum to 1
    /// within 1e-9, and k_neighbors >= 1.
    void validate() const
    {
        std::vector<std::string> problems;
        for (double w : {weight_college, weight_programs, weight_interests, weight_expertise}) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                problems.emplace_back("similarity weights must be finite and >= 0");
                break;
            }
        }
        double total = weight_college + weight_programs + weight_interests + weight_expertise;
        if (std::abs(total - 1.0) > 1e-9)
            problems.emplace_back("similarity weights must sum to 1");
        if (k_neighbors < 1)
            problems.emplace_back("k_neighbors must be >= 1");
        if (!problems.empty())
            throw Error(ErrorCode::validation_failed, "invalid similarity parameters",
                        std::move(problems));
    }
};

/// |a ∩ b| / |a ∪ b|. Callers handle the both-empty case.
inline double jaccard(const TokenSet& a, const TokenSet& b)
{
    std::size_t shared = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++shared;
            ++ia;
            ++ib;
        }
    }
    std::size_t uni = a.size() + b.size() - shared;
    return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

/// Weighted blend of college equality and Jaccard overlap of the three token
/// sets. Attributes empty on both sides drop out and the remaining weights
/// are renormalized. Symmetric, in [0,1], and 1 for identical profiles.
inline double profile_similarity(const FacultyProfile& a, const FacultyProfile& b,
                                 const SimilarityParams& params)
{
    double weighted = params.weight_college * (a.college == b.college ? 1.0 : 0.0);
    double total = params.weight_college;

    auto add = [&](const TokenSet& x, const TokenSet& y, double w) {
        if (x.empty() && y.empty())
            return;
        weighted += w * jaccard(x, y);
        total += w;
    };
    add(a.programs, b.programs, params.weight_programs);
    add(a.interests, b.interests, params.weight_interests);
    add(a.expertise, b.expertise, params.weight_expertise);

    if (total <= 0.0)
        return 0.0;
    return std::clamp(weighted / total, 0.0, 1.0);
}

/// Up to k most similar faculty with similarity > 0, by similarity
/// descending then faculty_id ascending. `user` itself is skipped by id.
inline std::vector<Neighbor> nearest_neighbors(const FacultyProfile& user,
                                               std::span<const FacultyProfile> population,
                                               const SimilarityParams& params)
{
    std::vector<Neighbor> scored;
    scored.reserve(population.size());
    for (const auto& other : population) {
        if (other.faculty_id == user.faculty_id)
            continue;
        double sim = profile_similarity(user, other, params);
        if (sim > 0.0)
            scored.push_back({other.faculty_id, sim});
    }
    auto better = [](const Neighbor& x, const Neighbor& y) {
        if (x.similarity != y.similarity)
            return x.similarity > y.similarity;
        return x.faculty_id < y.faculty_id;
    };
    std::size_t keep = std::min(params.k_neighbors, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), better);
    scored.resize(keep);
    return scored;
}

} // namespace stprec
