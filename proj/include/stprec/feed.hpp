#pragma once

#include <string>
#include <string_view>

#include "json_io.hpp"
#include "persistence.hpp"
#include "recommender.hpp"

namespace stprec {

/// Runs the recommender for `faculty_id` against a snapshot.
inline std::vector<Recommendation> recommend_for(const StateSnapshot& state,
                                                 std::string_view faculty_id,
                                                 const RecommendParams& params, const Date& today)
{
    params.validate();
    Repository index(state);
    const auto& user = index.get_faculty(faculty_id);
    return recommend(user, state.items, state.faculty, state.likes, state.attendance, params,
                     today);
}

/// The feed document served by the API and printed by the CLI. Both emit
/// `feed_json(...).dump()` so their bytes agree for the same state.
inline json feed_json(const StateSnapshot& state, std::string_view faculty_id,
                      const std::vector<Recommendation>& recs)
{
    Repository index(state);
    json entries = json::array();
    for (const auto& r : recs) {
        json e = to_json(r);
        if (const auto* item = index.find_item(r.stp_id)) {
            e["title"] = item->title;
            e["provider"] = item->provider;
            e["start_date"] = format_date(item->start_date);
            e["end_date"] = item->end_date ? json(format_date(*item->end_date)) : json(nullptr);
            e["url"] = item->url ? json(*item->url) : json(nullptr);
        }
        entries.push_back(std::move(e));
    }
    return json{{"faculty_id", std::string(faculty_id)}, {"recommendations", std::move(entries)}};
}

} // namespace stprec
