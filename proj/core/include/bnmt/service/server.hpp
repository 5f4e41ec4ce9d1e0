#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "bnmt/service/store.hpp"

namespace bnmt::service {

// One JSON file; relative paths are resolved against its directory.
//   {"host": "127.0.0.1", "port": 8080, "log": "ratings.log",
//    "items": "items.jsonl", "pairs": "pairs.jsonl",
//    "cardinal_plan": "cardinal.plan", "pairwise_plan": "pairwise.plan",
//    "admin_token": "...", "static_dir": "ui",
//    "raters": [{"id": "r01", "token": "...", "task": "cardinal", "order_seed": 3}]}
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path log;
  std::optional<std::filesystem::path> items, pairs, cardinal_plan, pairwise_plan, static_dir;
  std::string admin_token;  // empty: exports are open
  std::vector<RaterSpec> raters;

  static ServiceConfig load(const std::filesystem::path& path);
};

StoreContent load_content(const ServiceConfig& cfg);

// HTTP+JSON front end of a FeedbackStore.
//   GET  /api/session/{rater}/next         X-Rater-Token
//   POST /api/ratings                      X-Rater-Token, RatingRecord JSON
//   GET  /api/session/{rater}/progress     X-Rater-Token
//   POST /api/session/{rater}/difficulty   X-Rater-Token, {"score": 1..10}
//   GET  /api/export/matrix?task=cardinal  X-Admin-Token when configured
//   GET  /api/export/log                   line-delimited feedback log
//   GET  /api/export/ratings               line-delimited rating records
// Errors: 400 malformed, 401 token, 404 unknown, 409 duplicate, 422 invalid.
class Server {
 public:
  Server(FeedbackStore& store, std::string admin_token = {},
         std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~Server();

  // Returns the bound port (an ephemeral one when port == 0).
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bnmt::service
