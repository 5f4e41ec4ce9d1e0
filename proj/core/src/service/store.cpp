#include "bnmt/service/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "bnmt/estimator/targets.hpp"
#include "bnmt/ratings/jsonl.hpp"
#include "bnmt/ratings/sessions.hpp"

namespace bnmt::service {

using ratings::RatingRecord;
using ratings::TaskKind;

namespace {

std::string rating_event(const RatingRecord& r) {
  auto j = nlohmann::json::parse(ratings::to_json_line(r));
  j["event"] = "rating";
  return j.dump();
}

std::string difficulty_event(const std::string& rater, int score) {
  nlohmann::json j;
  j["event"] = "difficulty";
  j["rater_id"] = rater;
  j["score"] = score;
  return j.dump();
}

}  // namespace

FeedbackStore::FeedbackStore(StoreContent content, std::filesystem::path log_path)
    : content_(std::move(content)), log_path_(std::move(log_path)) {
  for (const auto& i : content_.items) {
    if (!items_.emplace(i.item_id, &i).second) throw DataError("duplicate item id " + i.item_id);
  }
  for (const auto& p : content_.pairs) {
    if (!pairs_.emplace(p.pair_id, &p).second) throw DataError("duplicate pair id " + p.pair_id);
  }
  for (const auto* plan : {content_.cardinal_plan ? &*content_.cardinal_plan : nullptr,
                           content_.pairwise_plan ? &*content_.pairwise_plan : nullptr}) {
    if (!plan) continue;
    plan->validate();
    for (const auto& section : plan->sections) {
      for (const auto& id : section) {
        const bool known = plan->task_kind == TaskKind::cardinal ? items_.count(id) : pairs_.count(id);
        if (!known) throw DataError("plan refers to unknown id " + id);
      }
    }
  }
  for (const auto& spec : content_.raters) {
    const auto& plan = spec.task_kind == TaskKind::cardinal ? content_.cardinal_plan : content_.pairwise_plan;
    if (!plan) {
      throw DataError("rater " + spec.id + " needs a " + std::string(ratings::to_string(spec.task_kind)) +
                      " plan");
    }
    Rater r;
    r.spec = spec;
    r.order = (spec.order_seed ? ratings::reorder_within_sections(*plan, *spec.order_seed) : *plan).flatten();
    r.session.rater_id = spec.id;
    r.session.task_kind = spec.task_kind;
    if (!raters_.emplace(spec.id, std::move(r)).second) throw DataError("duplicate rater " + spec.id);
  }
  replay();
  fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd_ < 0) throw UsageError("cannot open log " + log_path_.string() + ": " + std::strerror(errno));
}

FeedbackStore::~FeedbackStore() {
  if (fd_ >= 0) ::close(fd_);
}

void FeedbackStore::replay() {
  std::ifstream is(log_path_, std::ios::binary);
  if (!is) return;
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string data = buf.str();
  is.close();

  std::size_t pos = 0, line_no = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) {
      // Torn write: never acknowledged, so it is safe to discard.
      std::filesystem::resize_file(log_path_, pos);
      break;
    }
    ++line_no;
    const std::string line = data.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string ev = j.at("event");
      if (ev == "rating") {
        auto r = ratings::rating_from_json(line);
        check_rating(r);
        apply_rating(r);
      } else if (ev == "difficulty") {
        rater(j.at("rater_id").get<std::string>()).session.difficulty = j.at("score").get<int>();
      } else {
        throw DataError("unknown event " + ev);
      }
      ++replayed_;
    } catch (const std::exception& e) {
      throw DataError("log " + log_path_.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void FeedbackStore::append(const std::string& line) {
  const std::string out = line + '\n';
  std::size_t done = 0;
  while (done < out.size()) {
    const ssize_t n = ::write(fd_, out.data() + done, out.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("log write failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error(std::string("log fsync failed: ") + std::strerror(errno));
}

const FeedbackStore::Rater& FeedbackStore::rater(const std::string& id) const {
  auto it = raters_.find(id);
  if (it == raters_.end()) throw NotFoundError("unknown rater " + id);
  return it->second;
}

FeedbackStore::Rater& FeedbackStore::rater(const std::string& id) {
  auto it = raters_.find(id);
  if (it == raters_.end()) throw NotFoundError("unknown rater " + id);
  return it->second;
}

void FeedbackStore::authenticate(const std::string& rater_id, const std::string& token) const {
  const auto& r = rater(rater_id);
  if (r.spec.token.empty() || r.spec.token != token) throw AuthError("invalid token for rater " + rater_id);
}

void FeedbackStore::check_rating(const RatingRecord& r) const {
  const auto& rt = rater(r.rater_id);
  if (answered_.count({r.rater_id, r.assignment_id, r.occurrence})) {
    throw DuplicateError("assignment " + r.assignment_id + " occurrence " +
                         std::to_string(r.occurrence) + " already answered by " + r.rater_id);
  }
  if (r.task_kind != rt.spec.task_kind) throw ValidationError("rater " + r.rater_id + " has a different task");
  if (!ratings::value_in_range(r.task_kind, r.value)) {
    throw ValidationError("value " + std::to_string(r.value) + " out of range for " +
                          std::string(ratings::to_string(r.task_kind)));
  }
  if (rt.session.cursor >= rt.order.size()) throw ValidationError("session of " + r.rater_id + " is complete");
  const auto& expect = rt.order[rt.session.cursor];
  if (r.assignment_id != expect.id || r.occurrence != expect.occurrence) {
    throw ValidationError("expected assignment " + expect.id + " occurrence " +
                          std::to_string(expect.occurrence) + ", got " + r.assignment_id + " occurrence " +
                          std::to_string(r.occurrence));
  }
  if (r.section_index != expect.section) throw ValidationError("section index does not match the plan");
}

void FeedbackStore::apply_rating(const RatingRecord& r) {
  auto& rt = rater(r.rater_id);
  ++rt.session.cursor;
  ++rt.session.completed;
  answered_.insert({r.rater_id, r.assignment_id, r.occurrence});
  records_.push_back(r);
}

std::optional<Assignment> FeedbackStore::next_task(const std::string& rater_id) const {
  std::lock_guard lock(mu_);
  const auto& rt = rater(rater_id);
  if (rt.session.cursor >= rt.order.size()) return std::nullopt;
  Assignment a;
  a.entry = rt.order[rt.session.cursor];
  a.task_kind = rt.spec.task_kind;
  a.total = rt.order.size();
  if (a.task_kind == TaskKind::cardinal) {
    a.item = items_.at(a.entry.id);
  } else {
    a.pair = pairs_.at(a.entry.id);
  }
  return a;
}

void FeedbackStore::submit(RatingRecord record) {
  std::lock_guard lock(mu_);
  try {
    ratings::validate_record(record);
  } catch (const DataError& e) {
    throw ValidationError(e.what());
  }
  check_rating(record);
  append(rating_event(record));
  apply_rating(record);
}

Progress FeedbackStore::progress(const std::string& rater_id) const {
  std::lock_guard lock(mu_);
  const auto& rt = rater(rater_id);
  Progress p;
  p.completed = rt.session.completed;
  p.total = rt.order.size();
  if (!rt.order.empty()) p.section = rt.order[std::min(rt.session.cursor, rt.order.size() - 1)].section;
  return p;
}

void FeedbackStore::set_difficulty(const std::string& rater_id, int score) {
  std::lock_guard lock(mu_);
  auto& rt = rater(rater_id);
  if (score < 1 || score > 10) throw ValidationError("difficulty must be in 1..10");
  if (rt.session.cursor < rt.order.size()) throw ValidationError("difficulty is asked after the session");
  if (rt.session.difficulty) throw DuplicateError("difficulty already recorded for " + rater_id);
  append(difficulty_event(rater_id, score));
  rt.session.difficulty = score;
}

RaterSession FeedbackStore::session(const std::string& rater_id) const {
  std::lock_guard lock(mu_);
  return rater(rater_id).session;
}

std::vector<RatingRecord> FeedbackStore::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

reliability::ReliabilityMatrix FeedbackStore::export_matrix(TaskKind kind,
                                                            const reliability::MatrixOptions& opts) const {
  std::lock_guard lock(mu_);
  return reliability::matrix_from_records(records_, kind, opts);
}

policy::FeedbackLog FeedbackStore::export_feedback_log(std::vector<std::string>* warnings) const {
  std::lock_guard lock(mu_);
  const auto m = reliability::matrix_from_records(records_, TaskKind::cardinal);
  policy::FeedbackLog log;
  if (m.empty()) return log;
  auto targets = estimator::prepare_cardinal_targets(m);
  if (warnings) *warnings = targets.warnings;
  for (const auto& [id, reward] : targets.reward) {
    const auto* item = items_.at(id);
    log.push_back({item->source, item->target, reward});
  }
  return log;
}

}  // namespace bnmt::service
