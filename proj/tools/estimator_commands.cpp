#include <spdlog/spdlog.h>

#include <fstream>
#include <memory>

#include "bnmt/common/error.hpp"
#include "bnmt/estimator/io.hpp"
#include "bnmt/estimator/targets.hpp"
#include "bnmt/estimator/training.hpp"
#include "bnmt/ratings/jsonl.hpp"
#include "bnmt/reliability/matrix.hpp"
#include "bnmt/simulation/feedback.hpp"
#include "common.hpp"

namespace bnmt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T, class F>
void write_jsonl(const fs::path& p, const std::vector<T>& xs, F&& exporter) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw UsageError("cannot write " + p.string());
  exporter(os, std::span<const T>(xs));
}

std::vector<SentencePair> slice(std::vector<SentencePair> corpus, std::size_t offset, std::size_t n) {
  if (offset > corpus.size()) throw DataError("offset beyond the corpus");
  corpus.erase(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(offset));
  if (n > 0 && n < corpus.size()) corpus.resize(n);
  return corpus;
}

struct SimulateOptions {
  fs::path model, corpus, out_rewards, out_pairs, out_scored, out_log;
  std::size_t offset = 0, n_sources = 0;
  simulation::SampleConfig sample;
  std::string log_reward = "sbleu";
  std::uint64_t seed = 1;
};

simulation::LogReward parse_log_reward(const std::string& s) {
  if (s == "sbleu") return simulation::LogReward::sbleu;
  if (s == "gleu") return simulation::LogReward::gleu;
  throw UsageError("unknown reward metric " + s);
}

void simulate_feedback(const CLI::App& sub, const SimulateOptions& o) {
  if (o.out_rewards.empty() && o.out_pairs.empty() && o.out_scored.empty() && o.out_log.empty()) {
    throw UsageError("simulate-feedback: give at least one of --out-rewards, --out-pairs, --out-scored, --out-log");
  }
  const auto p = policy::Seq2SeqPolicy::load_file(o.model);
  const auto corpus = slice(load_tsv(o.corpus), o.offset, o.n_sources);
  Rng rng(o.seed);
  Manifest m(sub, o.seed);
  m.input(o.model);
  m.input(o.corpus);
  fs::path primary;
  auto done = [&](const fs::path& f, std::size_t n) {
    m.output(f);
    m.result(f.filename().string(), n);
    if (primary.empty()) primary = f;
    spdlog::info("{}: {} records", f.string(), n);
  };
  if (!o.out_rewards.empty() || !o.out_pairs.empty()) {
    const auto data = simulation::simulate_ratings(p, corpus, o.sample, rng);
    if (!o.out_rewards.empty()) {
      write_jsonl(o.out_rewards, data.rewards, [](auto& os, auto xs) { estimator::export_rewards(os, xs); });
      done(o.out_rewards, data.rewards.size());
    }
    if (!o.out_pairs.empty()) {
      write_jsonl(o.out_pairs, data.pairs, [](auto& os, auto xs) { estimator::export_pairs(os, xs); });
      done(o.out_pairs, data.pairs.size());
    }
  }
  if (!o.out_scored.empty()) {
    const auto scored = simulation::sample_scored(p, corpus, o.sample.tau, rng);
    write_jsonl(o.out_scored, scored, [](auto& os, auto xs) { estimator::export_scored(os, xs); });
    done(o.out_scored, scored.size());
  }
  if (!o.out_log.empty()) {
    const auto log = simulation::logged_feedback(p, corpus, parse_log_reward(o.log_reward), o.sample.metric);
    write_jsonl(o.out_log, log, [](auto& os, auto xs) { policy::export_log(os, xs); });
    done(o.out_log, log.size());
  }
  m.write(primary);
}

struct TargetOptions {
  fs::path ratings, items, pairs, out_rewards, out_pairs;
};

void make_targets(const CLI::App& sub, const TargetOptions& o) {
  std::ifstream rs(o.ratings);
  if (!rs) throw UsageError("cannot read " + o.ratings.string());
  const auto records = ratings::import_ratings(rs);
  Manifest m(sub, 0);
  m.input(o.ratings);
  fs::path primary;
  if (!o.out_rewards.empty()) {
    std::ifstream is(o.items);
    if (!is) throw UsageError("--out-rewards needs --items");
    const auto items = ratings::import_items(is);
    const auto targets =
        estimator::prepare_cardinal_targets(reliability::matrix_from_records(records, ratings::TaskKind::cardinal));
    for (const auto& w : targets.warnings) spdlog::warn("{}", w);
    std::vector<estimator::RewardExample> out;
    for (const auto& item : items) {
      if (auto it = targets.reward.find(item.item_id); it != targets.reward.end()) {
        out.push_back(estimator::make_reward_example(item, it->second));
      }
    }
    write_jsonl(o.out_rewards, out, [](auto& os, auto xs) { estimator::export_rewards(os, xs); });
    m.input(o.items);
    m.output(o.out_rewards);
    primary = o.out_rewards;
    spdlog::info("{} cardinal reward targets", out.size());
  }
  if (!o.out_pairs.empty()) {
    std::ifstream is(o.pairs);
    if (!is) throw UsageError("--out-pairs needs --pairs");
    const auto pairs = ratings::import_pairs(is);
    const auto counts = estimator::count_preferences(records);
    std::vector<estimator::PreferencePair> out;
    for (const auto& pair : pairs) {
      if (auto it = counts.find(pair.pair_id); it != counts.end()) {
        out.push_back(estimator::make_preference_pair(pair, it->second));
      }
    }
    write_jsonl(o.out_pairs, out, [](auto& os, auto xs) { estimator::export_pairs(os, xs); });
    m.input(o.pairs);
    m.output(o.out_pairs);
    if (primary.empty()) primary = o.out_pairs;
    spdlog::info("{} preference targets", out.size());
  }
  if (primary.empty()) throw UsageError("make-targets: give --out-rewards or --out-pairs");
  m.write(primary);
}

struct AuxOptions {
  fs::path model, corpus, out_rewards, out_pairs;
  std::size_t offset = 0, n_sources = 0;
  estimator::AuxConfig aux;
};

void make_aux_data(const CLI::App& sub, const AuxOptions& o) {
  const auto p = policy::Seq2SeqPolicy::load_file(o.model);
  const auto corpus = slice(load_tsv(o.corpus), o.offset, o.n_sources);
  std::vector<Tokens> sources, refs;
  for (const auto& ex : corpus) {
    sources.push_back(ex.source);
    refs.push_back(ex.target);
  }
  const auto aux = estimator::make_aux_data(sources, refs, simulation::beam_ranks(p), o.aux);
  write_jsonl(o.out_rewards, aux.rewards, [](auto& os, auto xs) { estimator::export_rewards(os, xs); });
  Manifest m(sub, o.aux.seed);
  m.input(o.model);
  m.input(o.corpus);
  m.output(o.out_rewards);
  if (!o.out_pairs.empty()) {
    write_jsonl(o.out_pairs, aux.pairs, [](auto& os, auto xs) { estimator::export_pairs(os, xs); });
    m.output(o.out_pairs);
  }
  m.result("rewards", aux.rewards.size());
  m.result("pairs", aux.pairs.size());
  m.write(o.out_rewards);
  spdlog::info("{} auxiliary rewards, {} pairs", aux.rewards.size(), aux.pairs.size());
}

struct TrainEstimatorOptions {
  fs::path rewards, pairs, aux_rewards, aux_pairs, dev, out, vocab_policy, init;
  std::string loss = "mse";
  bool no_dropout = false;
  estimator::EstimatorConfig arch;
  estimator::EstimatorTrainConfig train;
};

estimator::EstimatorData load_data(const fs::path& rewards, const fs::path& pairs) {
  estimator::EstimatorData d;
  if (!rewards.empty()) d.rewards = estimator::import_rewards_file(rewards);
  if (!pairs.empty()) d.pairs = estimator::import_pairs_file(pairs);
  return d;
}

void collect(const estimator::EstimatorData& d, std::vector<Tokens>& src, std::vector<Tokens>& tgt) {
  for (const auto& r : d.rewards) {
    src.push_back(r.source);
    tgt.push_back(r.target);
  }
  for (const auto& p : d.pairs) {
    src.push_back(p.source);
    tgt.push_back(p.target_1);
    tgt.push_back(p.target_2);
  }
}

void train_estimator(const CLI::App& sub, TrainEstimatorOptions o) {
  o.train.loss = o.loss == "pw" ? estimator::LossKind::pairwise : estimator::LossKind::mse;
  o.train.dropout = !o.no_dropout;
  const auto human = load_data(o.rewards, o.pairs);
  const auto aux = load_data(o.aux_rewards, o.aux_pairs);
  if (o.aux_rewards.empty() && o.aux_pairs.empty() && sub.get_option("--p-aux")->count() == 0) o.train.p_aux = 0.0;
  std::vector<estimator::ScoredTranslation> dev;
  if (!o.dev.empty()) dev = estimator::import_scored_file(o.dev);

  auto est = [&] {
    if (!o.init.empty()) return estimator::RewardEstimator::load_file(o.init);
    if (!o.vocab_policy.empty()) {
      const auto p = policy::Seq2SeqPolicy::load_file(o.vocab_policy);
      return estimator::RewardEstimator(o.arch, p.source_vocab(), p.target_vocab(), o.train.seed);
    }
    std::vector<Tokens> src, tgt;
    collect(human, src, tgt);
    collect(aux, src, tgt);
    return estimator::RewardEstimator(o.arch, Vocab::build(src), Vocab::build(tgt), o.train.seed);
  }();
  const auto rep = estimator::train_estimator(est, human, aux, dev, o.train, [](const estimator::TrainStep& s) {
    if (s.step % 50 == 0) log_step("estimator", s.step, s.loss);
  });
  est.save_file(o.out);
  Manifest m(sub, o.train.seed);
  for (const auto& p : {o.rewards, o.pairs, o.aux_rewards, o.aux_pairs, o.dev, o.vocab_policy, o.init}) m.input(p);
  m.output(o.out);
  m.result("steps", rep.steps.size());
  m.result("best_step", rep.best_step);
  if (rep.best_spearman) m.result("dev_spearman", *rep.best_spearman);
  m.result("aux_batches", rep.aux_batches);
  m.result("human_batches", rep.human_batches);
  m.write(o.out);
  if (rep.best_spearman) spdlog::info("best dev rho {:.4f} at step {}", *rep.best_spearman, rep.best_step);
}

void eval_estimator(const CLI::App& sub, const fs::path& model, const fs::path& test, const fs::path& out) {
  const auto est = estimator::RewardEstimator::load_file(model);
  const auto data = estimator::import_scored_file(test);
  const auto ev = estimator::evaluate_estimator(est, data);
  json j{{"spearman_vs_ter", ev.spearman}, {"n", data.size()}};
  write_json(out, j);
  Manifest m(sub, 0);
  m.input(model);
  m.input(test);
  m.output(out);
  m.result("spearman_vs_ter", ev.spearman);
  m.write(out);
  spdlog::info("Spearman rho(r_hat, TER) = {:.4f} on {} translations", ev.spearman, data.size());
}

}  // namespace

void add_estimator_commands(CLI::App& app, Registry& reg) {
  {
    auto* sub = app.add_subcommand("simulate-feedback", "Simulated ratings, scored samples or a feedback log");
    auto o = std::make_shared<SimulateOptions>();
    sub->add_option("--model", o->model, "Policy checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--corpus", o->corpus, "TSV of sources and references")->required()->check(CLI::ExistingFile);
    sub->add_option("--offset", o->offset, "Skip this many sentences")->capture_default_str();
    sub->add_option("--n-sources", o->n_sources, "Use this many sentences, 0 for all")->capture_default_str();
    sub->add_option("--samples-per-source", o->sample.samples_per_source)->capture_default_str();
    sub->add_option("--tau", o->sample.tau, "Sampling temperature")->capture_default_str();
    sub->add_option("--out-rewards", o->out_rewards, "sBLEU rewards of samples (JSONL)");
    sub->add_option("--out-pairs", o->out_pairs, "Preference pairs with simulated q (JSONL)");
    sub->add_option("--out-scored", o->out_scored, "One sample per source with its reference (JSONL)");
    sub->add_option("--out-log", o->out_log, "Greedy translations with metric rewards (JSONL)");
    sub->add_option("--log-reward", o->log_reward, "sbleu or gleu")->capture_default_str();
    sub->add_option("--seed", o->seed)->capture_default_str();
    sub->callback([&reg, sub, o] { reg.action = [=] { simulate_feedback(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("make-targets", "Reward and preference targets from human ratings");
    auto o = std::make_shared<TargetOptions>();
    sub->add_option("--ratings", o->ratings)->required()->check(CLI::ExistingFile);
    sub->add_option("--items", o->items, "Rated translations (JSONL)");
    sub->add_option("--pairs", o->pairs, "Rated pairs (JSONL)");
    sub->add_option("--out-rewards", o->out_rewards);
    sub->add_option("--out-pairs", o->out_pairs);
    sub->callback([&reg, sub, o] { reg.action = [=] { make_targets(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("make-aux-data", "sBLEU rewards of beam ranks on a bitext");
    auto o = std::make_shared<AuxOptions>();
    sub->add_option("--model", o->model)->required()->check(CLI::ExistingFile);
    sub->add_option("--corpus", o->corpus)->required()->check(CLI::ExistingFile);
    sub->add_option("--offset", o->offset)->capture_default_str();
    sub->add_option("--n-sources", o->n_sources, "0 for all")->capture_default_str();
    sub->add_option("--n-ranks", o->aux.n_ranks)->capture_default_str();
    sub->add_option("--max-pairs-per-source", o->aux.max_pairs_per_source, "0 pairs all ranks")->capture_default_str();
    sub->add_option("--out-rewards", o->out_rewards)->required();
    sub->add_option("--out-pairs", o->out_pairs);
    sub->add_option("--seed", o->aux.seed)->capture_default_str();
    sub->callback([&reg, sub, o] { reg.action = [=] { make_aux_data(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("train-estimator", "Train a reward estimator with the MSE or pairwise loss");
    auto o = std::make_shared<TrainEstimatorOptions>();
    sub->add_option("--rewards", o->rewards, "Reward examples (JSONL)");
    sub->add_option("--pairs", o->pairs, "Preference pairs (JSONL)");
    sub->add_option("--aux-rewards", o->aux_rewards);
    sub->add_option("--aux-pairs", o->aux_pairs);
    sub->add_option("--dev", o->dev, "Scored translations for early stopping (JSONL)");
    sub->add_option("--out", o->out, "Estimator checkpoint")->required();
    sub->add_option("--init", o->init, "Continue from this estimator");
    sub->add_option("--vocab-from-policy", o->vocab_policy, "Take vocabularies from a policy checkpoint");
    sub->add_option("--loss", o->loss, "mse or pw")->check(CLI::IsMember({"mse", "pw"}))->capture_default_str();
    sub->add_option("--p-aux", o->train.p_aux, "Share of auxiliary batches; 0 when no auxiliary data is given")
        ->capture_default_str();
    sub->add_option("--batch-size", o->train.batch_size)->capture_default_str();
    sub->add_option("--lr", o->train.adam.lr)->capture_default_str();
    sub->add_option("--clip", o->train.clip_norm)->capture_default_str();
    sub->add_option("--steps", o->train.max_steps)->capture_default_str();
    sub->add_option("--eval-every", o->train.eval_every)->capture_default_str();
    sub->add_option("--patience", o->train.patience)->capture_default_str();
    sub->add_flag("--no-dropout", o->no_dropout);
    sub->add_option("--seed", o->train.seed)->capture_default_str();
    sub->add_option("--embed-dim", o->arch.embed_dim)->capture_default_str();
    sub->add_option("--hidden", o->arch.hidden)->capture_default_str();
    sub->add_option("--n-filters", o->arch.n_filters)->capture_default_str();
    sub->add_option("--filter-min", o->arch.filter_min)->capture_default_str();
    sub->add_option("--filter-max", o->arch.filter_max)->capture_default_str();
    sub->add_option("--dropout", o->arch.dropout)->capture_default_str();
    sub->callback([&reg, sub, o] { reg.action = [=] { train_estimator(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("eval-estimator", "Spearman rho between estimated reward and TER");
    auto model = std::make_shared<fs::path>(), test = std::make_shared<fs::path>(), out = std::make_shared<fs::path>();
    sub->add_option("--model", *model)->required()->check(CLI::ExistingFile);
    sub->add_option("--test", *test, "Scored translations (JSONL)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", *out, "Result (JSON)")->required();
    sub->callback([&reg, sub, model, test, out] { reg.action = [=] { eval_estimator(*sub, *model, *test, *out); }; });
  }
}

}  // namespace bnmt::cli
