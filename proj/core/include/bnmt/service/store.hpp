#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bnmt/common/error.hpp"
#include "bnmt/policy/feedback_log.hpp"
#include "bnmt/ratings/types.hpp"
#include "bnmt/reliability/matrix.hpp"

namespace bnmt::service {

class NotFoundError : public Error {
 public:
  using Error::Error;
};
class ValidationError : public Error {
 public:
  using Error::Error;
};
class DuplicateError : public Error {
 public:
  using Error::Error;
};
class AuthError : public Error {
 public:
  using Error::Error;
};

struct RaterSpec {
  std::string id;
  std::string token;
  ratings::TaskKind task_kind = ratings::TaskKind::cardinal;
  // Rater-specific shuffle of every section; absent keeps the shared order.
  std::optional<std::uint64_t> order_seed;
};

struct RaterSession {
  std::string rater_id;
  ratings::TaskKind task_kind = ratings::TaskKind::cardinal;
  std::size_t cursor = 0;
  std::size_t completed = 0;
  std::optional<int> difficulty;  // 1 (very difficult) .. 10 (very easy)
};

struct Assignment {
  ratings::PlanEntry entry;
  ratings::TaskKind task_kind = ratings::TaskKind::cardinal;
  std::size_t total = 0;
  const ratings::TranslationItem* item = nullptr;  // cardinal
  const ratings::ItemPair* pair = nullptr;         // pairwise
};

struct Progress {
  std::size_t completed = 0;
  std::size_t total = 0;
  std::size_t section = 0;  // current section; the last one when done
};

struct StoreContent {
  std::vector<ratings::TranslationItem> items;
  std::vector<ratings::ItemPair> pairs;
  std::optional<ratings::SessionPlan> cardinal_plan;
  std::optional<ratings::SessionPlan> pairwise_plan;
  std::vector<RaterSpec> raters;
};

// Session state of every rater, always equal to the fold of the
// append-only log.  Each accepted submission is written and fsync'd before
// the call returns.  All members are safe to call concurrently.
class FeedbackStore {
 public:
  // Replays an existing log.  A torn final line (no newline) is dropped and
  // the file truncated to the last complete record.
  FeedbackStore(StoreContent content, std::filesystem::path log_path);

  void authenticate(const std::string& rater_id, const std::string& token) const;

  // Empty once the rater has answered everything.
  std::optional<Assignment> next_task(const std::string& rater_id) const;
  // Throws ValidationError (wrong assignment, illegal value) or
  // DuplicateError (assignment already answered); state is unchanged then.
  void submit(ratings::RatingRecord record);
  Progress progress(const std::string& rater_id) const;
  void set_difficulty(const std::string& rater_id, int score);
  RaterSession session(const std::string& rater_id) const;

  std::vector<ratings::RatingRecord> records() const;
  reliability::ReliabilityMatrix export_matrix(ratings::TaskKind kind,
                                               const reliability::MatrixOptions& opts = {}) const;
  // Cardinal ratings turned into [0,1] rewards per translation.
  policy::FeedbackLog export_feedback_log(std::vector<std::string>* warnings = nullptr) const;

  const std::filesystem::path& log_path() const { return log_path_; }
  std::size_t replayed_events() const { return replayed_; }

 private:
  struct Rater {
    RaterSpec spec;
    std::vector<ratings::PlanEntry> order;
    RaterSession session;
  };

  const Rater& rater(const std::string& id) const;
  Rater& rater(const std::string& id);
  void apply_rating(const ratings::RatingRecord& r);
  void check_rating(const ratings::RatingRecord& r) const;
  void append(const std::string& line);
  void replay();

  StoreContent content_;
  std::map<std::string, const ratings::TranslationItem*> items_;
  std::map<std::string, const ratings::ItemPair*> pairs_;
  std::map<std::string, Rater> raters_;
  std::vector<ratings::RatingRecord> records_;
  std::set<std::tuple<std::string, std::string, int>> answered_;
  std::filesystem::path log_path_;
  int fd_ = -1;
  std::size_t replayed_ = 0;
  mutable std::mutex mu_;

 public:
  ~FeedbackStore();
  FeedbackStore(const FeedbackStore&) = delete;
  FeedbackStore& operator=(const FeedbackStore&) = delete;
};

}  // namespace bnmt::service
