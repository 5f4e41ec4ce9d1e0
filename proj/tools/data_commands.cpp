#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "bnmt/common/error.hpp"
#include "bnmt/common/rng.hpp"
#include "bnmt/metrics/metrics.hpp"
#include "bnmt/policy/evaluation.hpp"
#include "bnmt/ratings/jsonl.hpp"
#include "bnmt/ratings/selection.hpp"
#include "bnmt/ratings/sessions.hpp"
#include "bnmt/service/server.hpp"
#include "bnmt/synthetic/task.hpp"
#include "common.hpp"

namespace bnmt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void make_synthetic(const CLI::App& sub, const synthetic::TaskConfig& cfg, const fs::path& out_dir) {
  const auto task = synthetic::make_task(cfg);
  fs::create_directories(out_dir);
  Manifest m(sub, cfg.seed);
  const std::pair<const char*, const std::vector<SentencePair>*> files[] = {
      {"out_train.tsv", &task.out_train}, {"out_dev.tsv", &task.out_dev}, {"in_train.tsv", &task.in_train},
      {"in_dev.tsv", &task.in_dev},       {"in_test.tsv", &task.in_test}};
  for (const auto& [name, data] : files) {
    write_tsv_file(out_dir / name, *data);
    m.output(out_dir / name);
  }
  json lex;
  for (const auto& [s, t] : task.plain_lexicon) lex["plain"][s] = t;
  for (const auto& [s, senses] : task.ambiguous_lexicon) lex["ambiguous"][s] = {senses.first, senses.second};
  write_json(out_dir / "lexicon.json", lex);
  m.output(out_dir / "lexicon.json");
  m.write(out_dir / "task");
  spdlog::info("wrote {} out-of-domain and {} in-domain training pairs to {}", task.out_train.size(),
               task.in_train.size(), out_dir.string());
}

struct PrepareOptions {
  fs::path model_a, model_b, corpus, out_dir;
  int beam = 0;
  ratings::SelectionCriteria criteria;
};

void prepare_items(const CLI::App& sub, const PrepareOptions& o) {
  const auto a = policy::Seq2SeqPolicy::load_file(o.model_a);
  const auto b = policy::Seq2SeqPolicy::load_file(o.model_b);
  const auto corpus = load_tsv(o.corpus);
  policy::DecodeOptions dec;
  if (o.beam > 0) dec.beam = policy::BeamConfig{.width = o.beam};
  const auto ha = policy::translate_all(a, corpus, dec);
  const auto hb = policy::translate_all(b, corpus, dec);
  std::vector<ratings::CandidatePair> cands;
  const int width = static_cast<int>(std::to_string(corpus.size()).size());
  std::size_t empty = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (ha[i].empty() || hb[i].empty()) {
      ++empty;
      continue;
    }
    std::ostringstream id;
    id << 'p' << std::setw(width) << std::setfill('0') << i;
    ratings::CandidatePair c;
    c.pair_id = id.str();
    c.out_domain = {ratings::item_id_for(c.pair_id, false), corpus[i].source, ha[i], ratings::SystemTag::out_domain,
                    corpus[i].target};
    c.in_domain = {ratings::item_id_for(c.pair_id, true), corpus[i].source, hb[i], ratings::SystemTag::in_domain,
                   corpus[i].target};
    c.reference = corpus[i].target;
    cands.push_back(std::move(c));
  }
  if (empty > 0) spdlog::warn("skipped {} sources with an empty translation", empty);
  const auto pairs = ratings::select_rating_items(cands, o.criteria);
  const auto items = ratings::split_pairs(pairs);
  fs::create_directories(o.out_dir);
  {
    std::ofstream os(o.out_dir / "pairs.jsonl");
    ratings::export_jsonl(os, std::span<const ratings::ItemPair>(pairs));
  }
  {
    std::ofstream os(o.out_dir / "items.jsonl");
    ratings::export_jsonl(os, std::span<const ratings::TranslationItem>(items));
  }
  Manifest m(sub, 0);
  for (const auto& p : {o.model_a, o.model_b, o.corpus}) m.input(p);
  m.output(o.out_dir / "pairs.jsonl");
  m.output(o.out_dir / "items.jsonl");
  m.result("pairs", pairs.size());
  m.result("items", items.size());
  m.write(o.out_dir / "items");
  spdlog::info("selected {} pairs ({} items) out of {} candidates", pairs.size(), items.size(), cands.size());
}

struct SessionOptions {
  fs::path pairs, items, out_dir;
  std::size_t n_repeat_pairs = 80;
  std::size_t n_sections = 5;
  int cardinal_raters = 16;
  int pairwise_raters = 14;
  bool shuffle_per_rater = false;
  std::string admin_token;
  int port = 8080;
  std::uint64_t seed = 1;
};

std::string hex_token(Rng& rng) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << rng();
  return ss.str();
}

void build_sessions(const CLI::App& sub, const SessionOptions& o) {
  std::ifstream is(o.pairs);
  if (!is) throw UsageError("cannot read " + o.pairs.string());
  const auto pairs = ratings::import_pairs(is);
  const auto plans = ratings::build_study_plans(pairs, o.n_repeat_pairs, o.n_sections, o.seed);
  fs::create_directories(o.out_dir);
  {
    std::ofstream os(o.out_dir / "cardinal.plan");
    ratings::export_plan(os, plans.cardinal);
  }
  {
    std::ofstream os(o.out_dir / "pairwise.plan");
    ratings::export_plan(os, plans.pairwise);
  }
  Rng rng(o.seed);
  json raters = json::array();
  auto add_raters = [&](int n, const char* prefix, const char* task) {
    for (int i = 0; i < n; ++i) {
      std::ostringstream id;
      id << prefix << std::setw(2) << std::setfill('0') << i + 1;
      json r{{"id", id.str()}, {"token", hex_token(rng)}, {"task", task}};
      if (o.shuffle_per_rater) r["order_seed"] = derive_seed(o.seed, raters.size() + 1);
      raters.push_back(r);
    }
  };
  add_raters(o.cardinal_raters, "c", "cardinal");
  add_raters(o.pairwise_raters, "w", "pairwise");
  const auto rel = [&](const fs::path& p) { return fs::proximate(p, o.out_dir).string(); };
  json cfg{{"host", "127.0.0.1"},
           {"port", o.port},
           {"log", "ratings.log"},
           {"items", rel(o.items)},
           {"pairs", rel(o.pairs)},
           {"cardinal_plan", "cardinal.plan"},
           {"pairwise_plan", "pairwise.plan"},
           {"admin_token", o.admin_token.empty() ? hex_token(rng) : o.admin_token},
           {"raters", raters}};
  write_json(o.out_dir / "service.json", cfg);
  Manifest m(sub, o.seed);
  m.input(o.pairs);
  m.input(o.items);
  for (const char* f : {"cardinal.plan", "pairwise.plan", "service.json"}) m.output(o.out_dir / f);
  m.result("cardinal_assignments", plans.cardinal.total_assignments());
  m.result("pairwise_assignments", plans.pairwise.total_assignments());
  m.write(o.out_dir / "service.json");
  spdlog::info("{} cardinal and {} pairwise assignments per rater", plans.cardinal.total_assignments(),
               plans.pairwise.total_assignments());
}

// A simulated rater judges translations by sBLEU against the reference, with
// a personal offset and personal noise level.
struct RaterModel {
  double bias = 0.0;
  double noise = 0.5;
};

struct SimulationOptions {
  fs::path service_config, out;
  double bias_sd = 0.5;
  double noise_lo = 0.3;
  double noise_hi = 1.2;
  double tie_margin = 0.05;
  std::uint64_t seed = 1;
};

int cardinal_value(const ratings::TranslationItem& item, const RaterModel& r, Rng& rng) {
  if (!item.reference) throw DataError("item " + item.item_id + " has no reference to simulate a rating");
  const double q = metrics::sbleu(item.target, *item.reference);
  const double v = 1.0 + 4.0 * q + r.bias + std::normal_distribution<double>(0.0, r.noise)(rng);
  return std::clamp(static_cast<int>(std::lround(v)), 1, 5);
}

int pairwise_value(const ratings::ItemPair& pair, const RaterModel& r, double tie_margin, Rng& rng) {
  if (!pair.reference) throw DataError("pair " + pair.pair_id + " has no reference to simulate a judgment");
  const double d = metrics::sbleu(pair.target_a, *pair.reference) - metrics::sbleu(pair.target_b, *pair.reference) +
                   std::normal_distribution<double>(0.0, 0.25 * r.noise)(rng);
  if (std::abs(d) < tie_margin) return static_cast<int>(ratings::PairwiseChoice::no_preference);
  return static_cast<int>(d > 0 ? ratings::PairwiseChoice::prefer_a : ratings::PairwiseChoice::prefer_b);
}

void simulate_ratings(const CLI::App& sub, const SimulationOptions& o) {
  const auto cfg = service::ServiceConfig::load(o.service_config);
  service::FeedbackStore store(service::load_content(cfg), cfg.log);
  std::int64_t clock = 0;
  for (std::size_t i = 0; i < cfg.raters.size(); ++i) {
    const auto& spec = cfg.raters[i];
    Rng rng(derive_seed(o.seed, i + 1));
    RaterModel model;
    model.bias = std::normal_distribution<double>(0.0, o.bias_sd)(rng);
    model.noise = std::uniform_real_distribution<double>(o.noise_lo, o.noise_hi)(rng);
    while (const auto task = store.next_task(spec.id)) {
      ratings::RatingRecord r;
      r.rater_id = spec.id;
      r.assignment_id = task->entry.id;
      r.occurrence = task->entry.occurrence;
      r.task_kind = task->task_kind;
      r.section_index = task->entry.section;
      r.value = task->task_kind == ratings::TaskKind::cardinal ? cardinal_value(*task->item, model, rng)
                                                                : pairwise_value(*task->pair, model, o.tie_margin, rng);
      r.timestamp_ms = clock += 1000;
      store.submit(r);
    }
  }
  const auto records = store.records();
  {
    if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
    std::ofstream os(o.out);
    ratings::export_jsonl(os, std::span<const ratings::RatingRecord>(records));
  }
  Manifest m(sub, o.seed);
  m.input(o.service_config);
  m.output(o.out);
  m.result("records", records.size());
  m.write(o.out);
  spdlog::info("{} ratings from {} raters", records.size(), cfg.raters.size());
}

void serve(const fs::path& config_path, std::optional<int> port) {
  const auto cfg = service::ServiceConfig::load(config_path);
  service::FeedbackStore store(service::load_content(cfg), cfg.log);
  if (store.replayed_events() > 0) spdlog::info("replayed {} logged events", store.replayed_events());
  service::Server server(store, cfg.admin_token, cfg.static_dir);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  const int bound = server.bind(cfg.host, port.value_or(cfg.port));
  spdlog::info("listening on {}:{}", cfg.host, bound);
  std::atomic<bool> stopping{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (stopping.exchange(true)) return;
    spdlog::info("stopping");
    server.stop();
  });
  server.listen();
  if (!stopping.exchange(true)) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
}

}  // namespace

void add_data_commands(CLI::App& app, Registry& reg) {
  {
    auto* sub = app.add_subcommand("make-synthetic", "Write a synthetic out-of-domain / in-domain translation task");
    auto cfg = std::make_shared<synthetic::TaskConfig>();
    auto out = std::make_shared<fs::path>();
    sub->add_option("--out-dir", *out, "Directory for the TSV files")->required();
    sub->add_option("--n-plain", cfg->n_plain)->capture_default_str();
    sub->add_option("--n-ambiguous", cfg->n_ambiguous)->capture_default_str();
    sub->add_option("--min-len", cfg->min_len)->capture_default_str();
    sub->add_option("--max-len", cfg->max_len)->capture_default_str();
    sub->add_option("--p-in-sense-out-domain", cfg->p_in_sense_out_domain)->capture_default_str();
    sub->add_option("--n-out-train", cfg->n_out_train)->capture_default_str();
    sub->add_option("--n-out-dev", cfg->n_out_dev)->capture_default_str();
    sub->add_option("--n-in-train", cfg->n_in_train)->capture_default_str();
    sub->add_option("--n-in-dev", cfg->n_in_dev)->capture_default_str();
    sub->add_option("--n-in-test", cfg->n_in_test)->capture_default_str();
    sub->add_option("--seed", cfg->seed)->capture_default_str();
    sub->callback([&reg, sub, cfg, out] { reg.action = [=] { make_synthetic(*sub, *cfg, *out); }; });
  }
  {
    auto* sub = app.add_subcommand("prepare-items", "Select translation pairs of two systems for rating");
    auto o = std::make_shared<PrepareOptions>();
    sub->add_option("--model-a", o->model_a, "Out-of-domain system checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--model-b", o->model_b, "In-domain system checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--corpus", o->corpus, "TSV of sources and references")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", o->out_dir)->required();
    sub->add_option("--beam", o->beam, "Beam width, 0 for greedy")->capture_default_str();
    sub->add_option("--n-select", o->criteria.n_select)->capture_default_str();
    sub->add_option("--ref-len-lo", o->criteria.ref_len_lo)->capture_default_str();
    sub->add_option("--ref-len-hi", o->criteria.ref_len_hi)->capture_default_str();
    sub->add_option("--max-rel-len-diff", o->criteria.max_relative_length_diff)->capture_default_str();
    sub->callback([&reg, sub, o] { reg.action = [=] { prepare_items(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("build-sessions", "Build rating session plans and a service config");
    auto o = std::make_shared<SessionOptions>();
    sub->add_option("--pairs", o->pairs)->required()->check(CLI::ExistingFile);
    sub->add_option("--items", o->items)->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", o->out_dir)->required();
    sub->add_option("--n-repeat-pairs", o->n_repeat_pairs)->capture_default_str();
    sub->add_option("--n-sections", o->n_sections)->capture_default_str();
    sub->add_option("--cardinal-raters", o->cardinal_raters)->capture_default_str();
    sub->add_option("--pairwise-raters", o->pairwise_raters)->capture_default_str();
    sub->add_flag("--shuffle-per-rater", o->shuffle_per_rater, "Give every rater an own order within sections");
    sub->add_option("--admin-token", o->admin_token, "Generated when empty");
    sub->add_option("--port", o->port)->capture_default_str();
    sub->add_option("--seed", o->seed)->capture_default_str();
    sub->callback([&reg, sub, o] { reg.action = [=] { build_sessions(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("simulate-ratings", "Answer every session of a service config with simulated raters");
    auto o = std::make_shared<SimulationOptions>();
    sub->add_option("--service-config", o->service_config)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "Rating records (JSONL)")->required();
    sub->add_option("--bias-sd", o->bias_sd)->capture_default_str();
    sub->add_option("--noise-lo", o->noise_lo)->capture_default_str();
    sub->add_option("--noise-hi", o->noise_hi)->capture_default_str();
    sub->add_option("--tie-margin", o->tie_margin)->capture_default_str();
    sub->add_option("--seed", o->seed)->capture_default_str();
    sub->callback([&reg, sub, o] { reg.action = [=] { simulate_ratings(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("serve", "Run the rating service");
    auto path = std::make_shared<fs::path>();
    auto port = std::make_shared<std::optional<int>>();
    sub->add_option("--service-config", *path)->required()->check(CLI::ExistingFile);
    sub->add_option("--port", *port, "Overrides the config; 0 picks a free port");
    sub->callback([&reg, path, port] { reg.action = [=] { serve(*path, *port); }; });
  }
}

}  // namespace bnmt::cli
