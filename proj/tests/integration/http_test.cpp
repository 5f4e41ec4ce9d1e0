#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>
#include <thread>

#include "bnmt/ratings/jsonl.hpp"
#include "bnmt/service/server.hpp"
#include "study_fixture.hpp"

using namespace bnmt;
using namespace bnmt::service;
using nlohmann::json;

namespace {

class Running {
 public:
  Running(FeedbackStore& store, std::string admin = "admin-secret") : server_(store, std::move(admin)) {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.listen(); });
    server_.wait_until_ready();
  }
  ~Running() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }

 private:
  Server server_;
  int port_ = 0;
  std::thread thread_;
};

httplib::Headers rater(const std::string& token) { return {{"X-Rater-Token", token}}; }

json answer_for(const json& task) {
  const auto kind = ratings::parse_task_kind(task["task_kind"].get<std::string>());
  const auto id = task["rater_id"].get<std::string>();
  const int v = fixture::scripted_value(id, task["assignment_id"], task["occurrence"], kind);
  json body{{"rater_id", id},
            {"assignment_id", task["assignment_id"]},
            {"occurrence", task["occurrence"]},
            {"task_kind", task["task_kind"]},
            {"section_index", task["section"]}};
  if (kind == ratings::TaskKind::cardinal) {
    body["value"] = v;
  } else {
    body["value"] = std::string(ratings::to_string(static_cast<ratings::PairwiseChoice>(v)));
  }
  return body;
}

// Answers every assignment of one rater over HTTP, returns the number sent.
int run_session(httplib::Client& c, const std::string& id, const std::string& token) {
  int n = 0;
  for (;;) {
    auto res = c.Get("/api/session/" + id + "/next", rater(token));
    EXPECT_TRUE(res);
    if (!res) return n;
    EXPECT_EQ(res->status, 200) << res->body;
    const auto task = json::parse(res->body);
    if (task["done"].get<bool>()) return n;
    auto post = c.Post("/api/ratings", rater(token), answer_for(task).dump(), "application/json");
    EXPECT_EQ(post->status, 200) << post->body;
    ++n;
  }
}

}  // namespace

TEST(Http, ScriptedSessionRoundTrip) {
  fixture::TempDir dir;
  // 10 pairs -> 20 translations, 2 repeated pairs -> 4 repeated translations
  FeedbackStore store(fixture::study(10, 2, 2, 1), dir / "log.jsonl");
  Running srv(store);
  auto c = srv.client();

  EXPECT_EQ(run_session(c, "c0", "tok-c0"), 24);
  auto done = json::parse(c.Get("/api/session/c0/next", rater("tok-c0"))->body);
  EXPECT_TRUE(done["done"].get<bool>());
  EXPECT_TRUE(done["difficulty_pending"].get<bool>());
  EXPECT_EQ(done["completed"], 24);

  auto diff = c.Post("/api/session/c0/difficulty", rater("tok-c0"), R"({"score": 6})", "application/json");
  EXPECT_EQ(diff->status, 200);
  EXPECT_EQ(c.Post("/api/session/c0/difficulty", rater("tok-c0"), R"({"score": 6})", "application/json")->status,
            409);

  // the exported matrix equals the scripted answers exactly
  EXPECT_EQ(c.Get("/api/export/matrix?task=cardinal")->status, 401);
  auto m = c.Get("/api/export/matrix?task=cardinal", {{"X-Admin-Token", "admin-secret"}});
  ASSERT_EQ(m->status, 200);
  const auto matrix = json::parse(m->body);
  EXPECT_EQ(matrix["scale"], "interval");
  ASSERT_EQ(matrix["observations"].size(), 24u);
  std::map<std::string, int> shown;
  for (const auto& o : matrix["observations"]) {
    const std::string unit = o["unit"];
    const int occurrence = shown[unit]++;
    EXPECT_EQ(o["value"].get<double>(),
              fixture::scripted_value("c0", unit, occurrence, ratings::TaskKind::cardinal));
  }

  auto recs = c.Get("/api/export/ratings", {{"X-Admin-Token", "admin-secret"}});
  std::istringstream is(recs->body);
  EXPECT_EQ(ratings::import_ratings(is), store.records());
}

TEST(Http, ErrorStatuses) {
  fixture::TempDir dir;
  FeedbackStore store(fixture::study(10, 2, 2, 1), dir / "log.jsonl");
  Running srv(store, "");
  auto c = srv.client();

  EXPECT_EQ(c.Get("/api/session/c0/next", rater("wrong"))->status, 401);
  EXPECT_EQ(c.Get("/api/session/nobody/next", rater("x"))->status, 404);
  EXPECT_EQ(c.Post("/api/ratings", rater("tok-c0"), "{not json", "application/json")->status, 400);

  const auto task = json::parse(c.Get("/api/session/c0/next", rater("tok-c0"))->body);
  auto body = answer_for(task);
  auto bad = body;
  bad["value"] = 7;
  EXPECT_EQ(c.Post("/api/ratings", rater("tok-c0"), bad.dump(), "application/json")->status, 422);
  EXPECT_EQ(c.Post("/api/ratings", rater("tok-c0"), body.dump(), "application/json")->status, 200);
  // replaying the same submission is rejected
  EXPECT_EQ(c.Post("/api/ratings", rater("tok-c0"), body.dump(), "application/json")->status, 409);
  EXPECT_EQ(c.Post("/api/session/c0/difficulty", rater("tok-c0"), R"({"score": 3})", "application/json")->status,
            422);
  EXPECT_EQ(c.Get("/api/export/matrix?task=cardinal")->status, 200);  // no admin token configured
  EXPECT_EQ(c.Get("/api/export/matrix?task=bogus")->status, 422);
}

TEST(Http, CrashAndReplayKeepsAcceptedRatings) {
  fixture::TempDir dir;
  const auto content = fixture::study(10, 2, 2, 1);
  std::size_t accepted = 0;
  {
    FeedbackStore store(content, dir / "log.jsonl");
    Running srv(store);
    auto c = srv.client();
    for (int i = 0; i < 7; ++i) {
      const auto task = json::parse(c.Get("/api/session/w0/next", rater("tok-w0"))->body);
      ASSERT_EQ(c.Post("/api/ratings", rater("tok-w0"), answer_for(task).dump(), "application/json")->status, 200);
    }
    accepted = store.records().size();
  }
  FeedbackStore store(content, dir / "log.jsonl");
  EXPECT_EQ(store.records().size(), accepted);
  Running srv(store);
  auto c = srv.client();
  const auto p = json::parse(c.Get("/api/session/w0/progress", rater("tok-w0"))->body);
  EXPECT_EQ(p["completed"], 7);
  EXPECT_EQ(run_session(c, "w0", "tok-w0"), 5);
}

TEST(Http, ConcurrentClients) {
  fixture::TempDir dir;
  const auto content = fixture::study(20, 4, 2, 3);
  FeedbackStore store(content, dir / "log.jsonl");
  Running srv(store);
  std::vector<std::thread> threads;
  std::atomic<int> sent{0};
  for (const auto& r : content.raters) {
    threads.emplace_back([&, id = r.id, token = r.token] {
      auto c = srv.client();
      sent += run_session(c, id, token);
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(sent.load(), 3 * 48 + 3 * 24);
  EXPECT_EQ(store.records().size(), static_cast<std::size_t>(sent.load()));
  FeedbackStore replayed(content, dir / "log.jsonl");
  EXPECT_EQ(replayed.records().size(), store.records().size());
}
