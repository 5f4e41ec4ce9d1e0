#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "bnmt/ratings/selection.hpp"
#include "bnmt/ratings/sessions.hpp"
#include "bnmt/service/store.hpp"

namespace fixture {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("bnmt-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

// n_pairs pairs with distinct translations; n_repeat pairs repeated.
inline bnmt::service::StoreContent study(std::size_t n_pairs, std::size_t n_repeat, std::size_t n_sections,
                                         std::size_t raters_per_task) {
  using namespace bnmt::ratings;
  std::vector<ItemPair> pairs;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const std::string n = std::to_string(i);
    pairs.push_back({"p" + n, {"src" + n, "x"}, {"a" + n, "y"}, {"b" + n, "z"}, bnmt::Tokens{"ref" + n}});
  }
  const auto plans = build_study_plans(pairs, n_repeat, n_sections, 5);
  bnmt::service::StoreContent c;
  c.pairs = pairs;
  c.items = split_pairs(pairs);
  c.cardinal_plan = plans.cardinal;
  c.pairwise_plan = plans.pairwise;
  for (std::size_t r = 0; r < raters_per_task; ++r) {
    c.raters.push_back({"c" + std::to_string(r), "tok-c" + std::to_string(r), TaskKind::cardinal, std::nullopt});
    c.raters.push_back({"w" + std::to_string(r), "tok-w" + std::to_string(r), TaskKind::pairwise, std::nullopt});
  }
  return c;
}

// The answer a scripted rater gives to an assignment.
inline int scripted_value(const std::string& rater, const std::string& id, int occurrence,
                          bnmt::ratings::TaskKind kind) {
  const auto h = std::hash<std::string>{}(rater + "/" + id + "/" + std::to_string(occurrence));
  return kind == bnmt::ratings::TaskKind::cardinal ? static_cast<int>(1 + h % 5) : static_cast<int>(h % 3) - 1;
}

}  // namespace fixture
