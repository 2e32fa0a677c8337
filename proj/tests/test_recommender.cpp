#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "stprec/eval.hpp"
#include "stprec/recommender.hpp"

using namespace stprec;
using namespace fixtures;

namespace {

std::vector<Recommendation> run(const StateSnapshot& s, const std::string& id,
                                const RecommendParams& p, Date today = worked_today())
{
    return recommend(Repository(s).get_faculty(id), s.items, s.faculty, s.likes, s.attendance, p,
                     today);
}

} // namespace

TEST(ProfileTerms, UnionOfProfileFields)
{
    EXPECT_EQ(profile_terms(josh()),
              (TokenSet{"cabeihm", "bs-hrm", "bs-accountancy", "accounting", "finance"}));
    EXPECT_EQ(profile_terms(profile("x", "X", "cte", {}, {})), TokenSet{"cte"});
    auto dup = profile("x", "X", "cte", {}, {"research"}, {"research"});
    EXPECT_EQ(profile_terms(dup), (TokenSet{"cte", "research"}));
}

TEST(ContentScore, Examples)
{
    EXPECT_DOUBLE_EQ(content_score(josh(), item("A", date(2030, 1, 1), {"finance", "accounting"})), 1.0);
    EXPECT_DOUBLE_EQ(content_score(josh(), item("B", date(2030, 1, 1), {"networking"})), 0.0);
    EXPECT_DOUBLE_EQ(content_score(josh(), item("C", date(2030, 1, 1), {})), 0.0);
    EXPECT_DOUBLE_EQ(content_score(josh(), tax_update()), 0.5);
}

TEST(CollabScore, Examples)
{
    std::vector<Neighbor> n{{"benjie", 0.46875}};
    std::vector<LikeEvent> liked{{"benjie", finance_forum().stp_id, {}}};
    std::vector<LikeEvent> none;
    EXPECT_DOUBLE_EQ(collab_score(josh(), finance_forum(), n, liked), 1.0);
    EXPECT_DOUBLE_EQ(collab_score(josh(), finance_forum(), n, none), 0.0);
    EXPECT_DOUBLE_EQ(collab_score(josh(), finance_forum(), std::vector<Neighbor>{}, liked), 0.0);
}

TEST(CollabScore, SimilarityWeighted)
{
    std::vector<Neighbor> n{{"a", 0.75}, {"b", 0.25}};
    std::vector<LikeEvent> liked{{"b", "x", {}}};
    StpItem x;
    x.stp_id = "x";
    EXPECT_DOUBLE_EQ(collab_score(josh(), x, n, liked), 0.25);
}

TEST(Recommend, WorkedExample)
{
    auto recs = run(worked_state(), "josh", {});
    ASSERT_EQ(recs.size(), 2u);

    EXPECT_EQ(recs[0].stp_id, finance_forum().stp_id);
    EXPECT_NEAR(recs[0].score, 1.0, 1e-9);
    EXPECT_NEAR(recs[0].content_component, 1.0, 1e-9);
    EXPECT_NEAR(recs[0].collab_component, 1.0, 1e-9);
    EXPECT_EQ(recs[0].matched_terms, std::vector<std::string>{"finance"});
    ASSERT_EQ(recs[0].contributing_neighbors.size(), 1u);
    EXPECT_EQ(recs[0].contributing_neighbors[0].faculty_id, "benjie");
    EXPECT_NEAR(recs[0].contributing_neighbors[0].similarity, 0.46875, 1e-9);

    EXPECT_EQ(recs[1].stp_id, tax_update().stp_id);
    EXPECT_NEAR(recs[1].score, 0.25, 1e-9);
    EXPECT_NEAR(recs[1].content_component, 0.5, 1e-9);
    EXPECT_NEAR(recs[1].collab_component, 0.0, 1e-9);
    EXPECT_TRUE(recs[1].contributing_neighbors.empty());
}

TEST(Recommend, AllItemsAlreadyLiked)
{
    auto s = worked_state();
    for (const auto& it : s.items)
        s.likes.push_back({"josh", it.stp_id, {}});
    canonicalize(s);
    EXPECT_TRUE(run(s, "josh", {}).empty());
}

TEST(Recommend, AttendedItemsExcluded)
{
    auto s = worked_state();
    s.attendance.push_back({"josh", finance_forum().stp_id, date(2030, 3, 1), std::nullopt});
    auto recs = run(s, "josh", {});
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].stp_id, tax_update().stp_id);
}

TEST(Recommend, PastItemsNeedFlag)
{
    auto s = worked_state();
    Date later = date(2030, 3, 2);  // Finance Forum already started
    auto recs = run(s, "josh", {}, later);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].stp_id, tax_update().stp_id);

    RecommendParams p;
    p.include_past_items = true;
    EXPECT_EQ(run(s, "josh", p, later).size(), 2u);
}

TEST(Recommend, BlendEndpoints)
{
    auto s = worked_state();
    RecommendParams content_only;
    content_only.alpha = 1.0;
    auto c = run(s, "josh", content_only);
    ASSERT_EQ(c.size(), 2u);
    for (const auto& r : c)
        EXPECT_DOUBLE_EQ(r.score, r.content_component);

    RecommendParams collab_only;
    collab_only.alpha = 0.0;
    auto k = run(s, "josh", collab_only);
    ASSERT_EQ(k.size(), 1u);  // Tax Update has no neighbor likes
    EXPECT_EQ(k[0].stp_id, finance_forum().stp_id);
    EXPECT_DOUBLE_EQ(k[0].score, 1.0);
}

TEST(Recommend, LimitTruncates)
{
    RecommendParams p;
    p.limit = 1;
    auto recs = run(worked_state(), "josh", p);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].stp_id, finance_forum().stp_id);
}

TEST(Recommend, ColdStartUserWithoutNeighborsGetsContent)
{
    auto s = worked_state();
    auto loner = profile("zoe", "Zoe", "cas", {}, {"networking"});
    s.faculty.push_back(loner);
    canonicalize(s);
    auto recs = run(s, "zoe", {});
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].stp_id, network_security().stp_id);
    EXPECT_DOUBLE_EQ(recs[0].score, 0.5);
}

TEST(Recommend, TieBreakByStartDateThenId)
{
    StateSnapshot s;
    s.faculty = {josh()};
    s.items = {item("Late", date(2030, 5, 1), {"finance"}), item("Early", date(2030, 4, 1), {"finance"}),
               item("Same A", date(2030, 4, 1), {"accounting"})};
    canonicalize(s);
    auto recs = run(s, "josh", {});
    ASSERT_EQ(recs.size(), 3u);
    std::string early = derive_stp_id("Early", date(2030, 4, 1));
    std::string same = derive_stp_id("Same A", date(2030, 4, 1));
    EXPECT_EQ(recs[0].stp_id, std::min(early, same));
    EXPECT_EQ(recs[1].stp_id, std::max(early, same));
    EXPECT_EQ(recs[2].stp_id, derive_stp_id("Late", date(2030, 5, 1)));
}

TEST(Recommend, InvariantsOnRandomStates)
{
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 300; ++trial) {
        auto s = random_state(rng);
        auto p = random_params(rng);
        for (const auto& u : s.faculty) {
            auto recs = run(s, u.faculty_id, p);
            EXPECT_LE(recs.size(), p.limit);
            EXPECT_EQ(recs.size(), run(s, u.faculty_id, p).size());  // determinism
            for (const auto& r : recs) {
                EXPECT_GT(r.score, 0.0);
                EXPECT_LE(r.score, 1.0);
                EXPECT_NEAR(r.score, p.alpha * r.content_component + (1 - p.alpha) * r.collab_component,
                            1e-9);
                for (const auto& l : s.likes)
                    EXPECT_FALSE(l.faculty_id == u.faculty_id && l.stp_id == r.stp_id);
                for (const auto& a : s.attendance)
                    EXPECT_FALSE(a.faculty_id == u.faculty_id && a.stp_id == r.stp_id);
            }
        }
    }
}

TEST(Recommend, LikePropagationProperty)
{
    std::mt19937_64 rng(5150);
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 100; ++trial) {
        auto s = random_state(rng, {5, 10, 0.3, 0.0});
        RecommendParams p = random_params(rng);
        p.alpha = std::min(p.alpha, 0.9);
        p.limit = 100;
        p.include_past_items = true;
        const auto& u = s.faculty.front();
        auto neighbors = nearest_neighbors(u, s.faculty, p.similarity);
        if (neighbors.empty())
            continue;
        // first (neighbor, item) pair where the neighbor has not liked the item yet
        auto likes = index_likes(s.likes);
        for (const auto& n : neighbors) {
            auto target = std::find_if(s.items.begin(), s.items.end(), [&](const StpItem& it) {
                return !likes.contains({n.faculty_id, it.stp_id}) &&
                       !likes.contains({u.faculty_id, it.stp_id});
            });
            if (target == s.items.end())
                continue;
            double before = collab_score(*target, neighbors, likes);
            auto feed_before = run(s, u.faculty_id, p);
            s.likes.push_back({n.faculty_id, target->stp_id, {}});
            likes = index_likes(s.likes);
            double after = collab_score(*target, neighbors, likes);
            EXPECT_GT(after, before);
            auto feed_after = run(s, u.faculty_id, p);
            auto score_of = [](const std::vector<Recommendation>& f, const std::string& id) {
                for (const auto& r : f)
                    if (r.stp_id == id)
                        return r.score;
                return 0.0;
            };
            EXPECT_GT(score_of(feed_after, target->stp_id), score_of(feed_before, target->stp_id));
            for (const auto& r : feed_before) {
                if (r.stp_id == target->stp_id)
                    continue;
                EXPECT_EQ(score_of(feed_after, r.stp_id), r.score);
            }
            ++checked;
            break;
        }
    }
    EXPECT_GE(checked, 50);
}

TEST(RecommendParams, Validation)
{
    RecommendParams p;
    EXPECT_NO_THROW(p.validate());
    p.alpha = 2.0;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.limit = 0;
    EXPECT_THROW(p.validate(), Error);
}
