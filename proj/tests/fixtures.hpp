#pragma once

// Shared test fixtures: two reference faculty profiles, a three-item
// catalog, and a generator of small random states.

#include <random>
#include <string>
#include <vector>

#include "stprec/domain.hpp"
#include "stprec/persistence.hpp"
#include "stprec/recommender.hpp"

namespace fixtures {

using namespace stprec;

inline Date date(int y, unsigned m, unsigned d)
{
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline Timestamp stamp(int y, unsigned m, unsigned d)
{
    return std::chrono::sys_days{date(y, m, d)};
}

inline FacultyProfile profile(std::string id, std::string name, std::string college,
                              TokenSet programs, TokenSet interests, TokenSet expertise = {})
{
    FacultyProfile f;
    f.faculty_id = std::move(id);
    f.name = std::move(name);
    f.college = std::move(college);
    f.programs = std::move(programs);
    f.interests = std::move(interests);
    f.expertise = std::move(expertise);
    f.created_at = stamp(2020, 6, 28);
    f.updated_at = f.created_at;
    return f;
}

/// First-time faculty user, tokens normalized.
inline FacultyProfile josh()
{
    return profile("josh", "Josh Magtibay", "cabeihm", {"bs-hrm", "bs-accountancy"},
                   {"accounting", "finance"});
}

/// Similar faculty user, tokens normalized.
inline FacultyProfile benjie()
{
    return profile("benjie", "Benjie A Bautista", "cabeihm",
                   {"bs-accountancy", "bs-business-administration"},
                   {"finance", "entrepreneurship", "business-management"});
}

/// Constructed profile sharing nothing with Josh.
inline FacultyProfile carla()
{
    return profile("carla", "Carla Reyes", "cecs", {"bs-computer-science"}, {"networking"},
                   {"security"});
}

inline StpItem item(std::string title, Date start, TokenSet tags)
{
    StpItem s;
    s.title = std::move(title);
    s.start_date = start;
    s.stp_id = derive_stp_id(s.title, s.start_date);
    s.provider = "CHED";
    s.tags = std::move(tags);
    s.source = "test";
    s.ingested_at = stamp(2030, 1, 1);
    return s;
}

inline Date worked_today() { return date(2030, 1, 1); }

inline StpItem finance_forum() { return item("Finance Forum", date(2030, 3, 1), {"finance"}); }
inline StpItem tax_update()
{
    return item("Tax Update", date(2030, 3, 2), {"accounting", "taxation"});
}
inline StpItem network_security()
{
    return item("Network Security", date(2030, 3, 3), {"networking"});
}

/// Josh, Benjie and Carla; three catalog items; Benjie likes Finance Forum.
inline StateSnapshot worked_state()
{
    StateSnapshot s;
    s.faculty = {josh(), benjie(), carla()};
    s.items = {finance_forum(), tax_update(), network_security()};
    s.likes = {{"benjie", finance_forum().stp_id, stamp(2030, 1, 1)}};
    canonicalize(s);
    return s;
}

// ---------------------------------------------------------------------------
// Random small states for property tests. Token pools are tiny on purpose so
// that overlaps and score ties are common.

struct RandomStateOptions {
    std::size_t max_faculty = 5;
    std::size_t max_items = 10;
    double like_density = 0.35;
    double attendance_density = 0.1;
};

inline StateSnapshot random_state(std::mt19937_64& rng, RandomStateOptions opt = {})
{
    static const std::vector<std::string> colleges{"cabeihm", "cecs", "cte"};
    static const std::vector<std::string> pool{"finance", "accounting", "networking", "teaching",
                                               "research", "taxation"};
    static const std::vector<std::string> programs{"bs-accountancy", "bs-hrm", "bs-it", "bsed"};

    auto pick = [&](std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    };
    auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
    auto subset = [&](const std::vector<std::string>& from, double p) {
        TokenSet out;
        for (const auto& t : from)
            if (coin(p))
                out.insert(t);
        return out;
    };

    StateSnapshot s;
    std::size_t nf = 1 + pick(opt.max_faculty);
    std::size_t ni = pick(opt.max_items + 1);
    for (std::size_t i = 0; i < nf; ++i)
        s.faculty.push_back(profile("u" + std::to_string(i), "User " + std::to_string(i),
                                    colleges[pick(colleges.size())], subset(programs, 0.3),
                                    subset(pool, 0.35), subset(pool, 0.15)));
    for (std::size_t j = 0; j < ni; ++j) {
        // a few shared start dates to exercise the date tie-break
        Date start = date(2030, 1, 1 + static_cast<unsigned>(pick(4)));
        if (coin(0.15))
            start = date(2029, 12, 1);  // already started relative to worked_today()
        s.items.push_back(item("Program " + std::to_string(j), start, subset(pool, 0.3)));
    }
    for (const auto& f : s.faculty)
        for (const auto& it : s.items)
            if (coin(opt.like_density))
                s.likes.push_back({f.faculty_id, it.stp_id, stamp(2030, 1, 1)});
    for (const auto& f : s.faculty)
        for (const auto& it : s.items)
            if (coin(opt.attendance_density))
                s.attendance.push_back({f.faculty_id, it.stp_id, date(2030, 2, 1), std::nullopt});
    canonicalize(s);
    return s;
}

inline RecommendParams random_params(std::mt19937_64& rng)
{
    RecommendParams p;
    static const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    p.alpha = std::bernoulli_distribution(0.5)(rng)
                  ? alphas[std::uniform_int_distribution<int>(0, 4)(rng)]
                  : std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    p.limit = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    p.include_past_items = std::bernoulli_distribution(0.3)(rng);
    p.similarity.k_neighbors = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    return p;
}

} // namespace fixtures
