#include <gtest/gtest.h>

#include <thread>

#include "fixtures.hpp"
#include "stprec/feed.hpp"
#include "stprec/service.hpp"

using namespace stprec;

namespace {

const char* kFeed = R"([
  {"title": "Finance Forum", "provider": "CHED", "start_date": "2030-03-01", "explicit_tags": ["finance"]},
  {"title": "Tax Update", "provider": "CHED", "start_date": "2030-03-02", "explicit_tags": ["accounting", "taxation"]},
  {"title": "Network Security", "provider": "CHED", "start_date": "2030-03-03", "explicit_tags": ["networking"]}
])";

class ServiceTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        service_.install(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }

    void TearDown() override
    {
        server_.stop();
        if (thread_.joinable())
            thread_.join();
    }

    static json body(const httplib::Result& r) { return json::parse(r->body); }

    httplib::Result post(const std::string& path, const json& j)
    {
        return client_->Post(path, j.dump(), "application/json");
    }

    // Josh and Benjie profiles, the three-item feed, Benjie likes Finance Forum
    void load_worked_example()
    {
        ASSERT_EQ(post("/api/faculty", {{"faculty_id", "josh"},
                                        {"name", "Josh Magtibay"},
                                        {"college", "CABEIHM"},
                                        {"programs", {"BS HRM", "BS Accountancy"}},
                                        {"interests", {"Accounting", "Finance"}},
                                        {"expertise", json::array()}})
                      ->status,
                  201);
        ASSERT_EQ(post("/api/faculty", {{"faculty_id", "benjie"},
                                        {"name", "Benjie A Bautista"},
                                        {"college", "CABEIHM"},
                                        {"programs", {"BS Accountancy", "BS Business Administration"}},
                                        {"interests", {"Finance", "Entrepreneurship", "Business Management"}}})
                      ->status,
                  201);
        auto ing = client_->Post("/api/admin/ingest", kFeed, "application/json");
        ASSERT_EQ(ing->status, 200);
        ASSERT_EQ(body(ing)["added"], 3);
        ASSERT_EQ(post("/api/faculty/benjie/likes", {{"stp_id", finance_forum_id()}})->status, 201);
    }

    static std::string finance_forum_id() { return fixtures::finance_forum().stp_id; }
    static std::string tax_update_id() { return fixtures::tax_update().stp_id; }

    StateStore store_{""};
    Service service_{store_, {}, {}, [] { return fixtures::worked_today(); }};
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::unique_ptr<httplib::Client> client_;
};

void expect_api_error(const httplib::Result& r, int status, const std::string& code)
{
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, status);
    auto j = json::parse(r->body);
    EXPECT_EQ(j["status"], status);
    EXPECT_EQ(j["code"], code);
    EXPECT_TRUE(j["message"].is_string());
}

} // namespace

TEST_F(ServiceTest, HealthOnFreshStore)
{
    auto r = client_->Get("/api/health");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    auto j = body(r);
    EXPECT_EQ(j["schema_version"], kSchemaVersion);
    EXPECT_EQ(j["counts"]["faculty"], 0);
    EXPECT_EQ(j["counts"]["items"], 0);
    EXPECT_EQ(j["counts"]["likes"], 0);
}

TEST_F(ServiceTest, CreateProfileNormalizesTokens)
{
    auto r = post("/api/faculty", {{"name", "Josh Magtibay"},
                                   {"college", "CABEIHM"},
                                   {"programs", {"BS-HRM", "BS-Accountancy"}},
                                   {"interests", {"Accounting", "Finance"}}});
    ASSERT_EQ(r->status, 201);
    auto j = body(r);
    EXPECT_EQ(j["faculty_id"], "josh-magtibay");
    EXPECT_EQ(j["programs"], json({"bs-accountancy", "bs-hrm"}));
    EXPECT_EQ(j["interests"], json({"accounting", "finance"}));
    EXPECT_EQ(j["college"], "cabeihm");

    auto list = client_->Get("/api/faculty");
    EXPECT_EQ(body(list).size(), 1u);
}

TEST_F(ServiceTest, ProfileErrors)
{
    expect_api_error(client_->Get("/api/faculty/nobody"), 404, "not_found");
    post("/api/faculty", {{"faculty_id", "ana"}, {"name", "Ana"}, {"college", "cte"}});
    expect_api_error(client_->Put("/api/faculty/ana", json{{"name", "Ana"}, {"college", ""}}.dump(),
                                  "application/json"),
                     400, "validation_failed");
    expect_api_error(client_->Put("/api/faculty/ghost", json{{"name", "G"}, {"college", "x"}}.dump(),
                                  "application/json"),
                     404, "not_found");
    expect_api_error(post("/api/faculty", {{"faculty_id", "ana"}, {"name", "Ana"}, {"college", "cte"}}),
                     409, "duplicate");
    expect_api_error(client_->Post("/api/faculty", "{nope", "application/json"), 400, "parse_error");
    expect_api_error(client_->Get("/api/unknown"), 404, "not_found");
}

TEST_F(ServiceTest, UpdateRenormalizes)
{
    post("/api/faculty", {{"faculty_id", "ana"}, {"name", "Ana"}, {"college", "cte"}});
    auto r = client_->Put("/api/faculty/ana",
                          json{{"name", "Ana Cruz"}, {"college", "CTE"}, {"interests", "Research, TEACHING"}}.dump(),
                          "application/json");
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(body(r)["interests"], json({"research", "teaching"}));
    EXPECT_EQ(body(client_->Get("/api/faculty/ana"))["name"], "Ana Cruz");
}

TEST_F(ServiceTest, WorkedExampleFeed)
{
    load_worked_example();
    auto r = client_->Get("/api/faculty/josh/recommendations");
    ASSERT_EQ(r->status, 200);
    auto recs = body(r)["recommendations"];
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0]["stp_id"], finance_forum_id());
    EXPECT_EQ(recs[0]["title"], "Finance Forum");
    EXPECT_NEAR(recs[0]["score"].get<double>(), 1.0, 1e-9);
    EXPECT_NEAR(recs[0]["collab_component"].get<double>(), 1.0, 1e-9);
    EXPECT_EQ(recs[1]["stp_id"], tax_update_id());
    EXPECT_NEAR(recs[1]["score"].get<double>(), 0.25, 1e-9);

    auto one = client_->Get("/api/faculty/josh/recommendations?limit=1");
    EXPECT_EQ(body(one)["recommendations"].size(), 1u);
}

TEST_F(ServiceTest, FeedEqualsDirectCall)
{
    load_worked_example();
    for (const char* q : {"", "?alpha=0.2", "?limit=1", "?include_past=true&alpha=1"}) {
        auto r = client_->Get(std::string("/api/faculty/josh/recommendations") + q);
        ASSERT_EQ(r->status, 200);
        RecommendParams p;
        std::string qs = q;
        if (qs.find("alpha=0.2") != std::string::npos)
            p.alpha = 0.2;
        if (qs.find("alpha=1") != std::string::npos)
            p.alpha = 1.0;
        if (qs.find("limit=1") != std::string::npos)
            p.limit = 1;
        p.include_past_items = qs.find("include_past=true") != std::string::npos;
        auto s = store_.snapshot();
        auto direct = feed_json(*s, "josh", recommend_for(*s, "josh", p, fixtures::worked_today()));
        EXPECT_EQ(r->body, direct.dump()) << q;
    }
}

TEST_F(ServiceTest, RecommendationParamErrors)
{
    load_worked_example();
    expect_api_error(client_->Get("/api/faculty/josh/recommendations?alpha=2"), 400, "validation_failed");
    expect_api_error(client_->Get("/api/faculty/josh/recommendations?limit=0"), 400, "validation_failed");
    expect_api_error(client_->Get("/api/faculty/josh/recommendations?limit=x"), 400, "validation_failed");
    expect_api_error(client_->Get("/api/faculty/josh/recommendations?include_past=maybe"), 400,
                     "validation_failed");
    expect_api_error(client_->Get("/api/faculty/nobody/recommendations"), 404, "not_found");
}

TEST_F(ServiceTest, LikeLifecycle)
{
    load_worked_example();
    expect_api_error(post("/api/faculty/benjie/likes", {{"stp_id", finance_forum_id()}}), 409, "duplicate");
    expect_api_error(post("/api/faculty/benjie/likes", {{"stp_id", "0000000000000000"}}), 404, "not_found");
    expect_api_error(post("/api/faculty/ghost/likes", {{"stp_id", finance_forum_id()}}), 404, "not_found");
    expect_api_error(client_->Delete("/api/faculty/josh/likes/" + tax_update_id()), 404, "not_found");

    auto liked = client_->Get("/api/faculty/benjie/likes");
    ASSERT_EQ(body(liked).size(), 1u);
    EXPECT_EQ(body(client_->Get("/api/faculty/benjie"))["liked_stp_ids"], json({finance_forum_id()}));

    auto del = client_->Delete("/api/faculty/benjie/likes/" + finance_forum_id());
    EXPECT_EQ(del->status, 204);
    // read-after-write: Josh's feed loses the collaborative signal at once
    auto recs = body(client_->Get("/api/faculty/josh/recommendations"))["recommendations"];
    for (const auto& r : recs)
        EXPECT_EQ(r["collab_component"], 0.0);
}

TEST_F(ServiceTest, AttendanceAndReport)
{
    load_worked_example();
    post("/api/faculty", {{"faculty_id", "carla"}, {"name", "Carla Reyes"}, {"college", "cecs"}});
    EXPECT_EQ(post("/api/faculty/josh/attendance",
                   {{"stp_id", finance_forum_id()}, {"date_attended", "2030-03-01"}})
                  ->status,
              201);
    post("/api/faculty/benjie/attendance", {{"stp_id", tax_update_id()}, {"date_attended", "2030-03-02"}});
    post("/api/faculty/carla/attendance", {{"stp_id", tax_update_id()}, {"date_attended", "2030-03-02"}});
    expect_api_error(post("/api/faculty/josh/attendance", {{"stp_id", tax_update_id()}, {"date_attended", "soon"}}),
                     400, "validation_failed");

    auto rows = body(client_->Get("/api/reports/attendance?college=cabeihm"));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0]["faculty_name"], "Benjie A Bautista");
    EXPECT_EQ(rows[1]["faculty_name"], "Josh Magtibay");

    auto csv = client_->Get("/api/reports/attendance?format=csv&college=cecs");
    EXPECT_EQ(csv->body,
              "faculty_name,college,item_title,provider,date_attended\r\n"
              "Carla Reyes,cecs,Tax Update,CHED,2030-03-02\r\n");
    expect_api_error(client_->Get("/api/reports/attendance?from=2020-12-31&to=2020-01-01"), 400,
                     "validation_failed");
}

TEST_F(ServiceTest, EmptyReports)
{
    EXPECT_EQ(client_->Get("/api/reports/attendance")->body, "[]");
    EXPECT_EQ(client_->Get("/api/reports/attendance?format=csv")->body,
              "faculty_name,college,item_title,provider,date_attended\r\n");
}

TEST_F(ServiceTest, IngestTwiceAndCatalog)
{
    json feed = json::array();
    for (int i = 0; i < 5; ++i)
        feed.push_back({{"title", "Program " + std::to_string(i)}, {"provider", "CHED"},
                        {"start_date", "2030-04-01"}, {"explicit_tags", {"research"}}});
    auto first = client_->Post("/api/admin/ingest", feed.dump(), "application/json");
    EXPECT_EQ(body(first)["added"], 5);
    auto second = client_->Post("/api/admin/ingest", feed.dump(), "application/json");
    EXPECT_EQ(body(second)["added"], 0);
    EXPECT_EQ(body(second)["duplicates_skipped"], 5);

    auto items = body(client_->Get("/api/stp"));
    ASSERT_EQ(items.size(), 5u);
    for (const auto& it : items)
        EXPECT_EQ(it["tags"], json({"research"}));
    auto id = items[0]["stp_id"].get<std::string>();
    EXPECT_EQ(body(client_->Get("/api/stp/" + id))["stp_id"], id);
    expect_api_error(client_->Get("/api/stp/none"), 404, "not_found");
    expect_api_error(client_->Post("/api/admin/ingest", "[{\"title\":", "application/json"), 400,
                     "parse_error");
}

TEST_F(ServiceTest, ConcurrentReadersSeeWholeMutations)
{
    load_worked_example();
    std::atomic<bool> stop{false};
    std::atomic<int> bad{0};
    std::thread reader([&] {
        httplib::Client c("127.0.0.1", port_);
        while (!stop) {
            auto r = c.Get("/api/health");
            if (!r || r->status != 200) {
                ++bad;
                continue;
            }
            auto j = json::parse(r->body);
            if (j["counts"]["faculty"].get<int>() < 2)
                ++bad;
        }
    });
    for (int i = 0; i < 20; ++i)
        post("/api/faculty", {{"name", "Extra " + std::to_string(i)}, {"college", "cas"}});
    stop = true;
    reader.join();
    EXPECT_EQ(bad, 0);
    EXPECT_EQ(body(client_->Get("/api/health"))["counts"]["faculty"], 22);
}
