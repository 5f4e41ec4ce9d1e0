#include <spdlog/spdlog.h>

#include <fstream>
#include <memory>

#include "bnmt/common/error.hpp"
#include "bnmt/estimator/model.hpp"
#include "bnmt/metrics/statistics.hpp"
#include "bnmt/policy/evaluation.hpp"
#include "bnmt/policy/trainers.hpp"
#include "bnmt/service/server.hpp"
#include "bnmt/simulation/feedback.hpp"
#include "common.hpp"

namespace bnmt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct LoopFlags {
  policy::LoopConfig cfg;
  std::string metric = "gleu";
  void add(CLI::App& sub, double default_lr) {
    cfg.adam.lr = default_lr;
    sub.add_option("--epochs", cfg.epochs)->capture_default_str();
    sub.add_option("--batch-size", cfg.batch_size)->capture_default_str();
    sub.add_option("--lr", cfg.adam.lr)->capture_default_str();
    sub.add_option("--clip", cfg.clip, "Gradient norm limit, <= 0 disables")->capture_default_str();
    sub.add_option("--eval-every", cfg.eval_every, "Steps between dev evaluations, 0 once per epoch")
        ->capture_default_str();
    sub.add_option("--patience", cfg.patience)->capture_default_str();
    sub.add_option("--select-by", metric, "Dev metric for model selection")
        ->check(CLI::IsMember({"gleu", "bleu"}))
        ->capture_default_str();
    sub.add_option("--max-seconds", cfg.max_seconds, "Wall-clock budget, 0 for none")->capture_default_str();
    sub.add_option("--seed", cfg.seed)->capture_default_str();
  }
  policy::LoopConfig resolved() const {
    auto c = cfg;
    c.metric = metric == "bleu" ? policy::SelectionMetric::bleu : policy::SelectionMetric::gleu;
    return c;
  }
};

json loop_json(const policy::LoopReport& r) {
  json j{{"steps", r.steps}};
  if (r.best) j["best"] = {{"step", r.best->step}, {"dev_score", r.best->score}};
  return j;
}

policy::Progress progress(const char* what) {
  return [what](int step, const policy::StepStats& s) {
    if (step % 25 == 0) log_step(what, step, s.objective);
    for (const auto& w : s.warnings) spdlog::warn("{}", w);
  };
}

struct MleOptions {
  fs::path train, dev, out, init;
  std::vector<fs::path> vocab_extra;
  int max_vocab = 0;
  int max_steps = 0;
  PolicyFlags arch;
  LoopFlags loop;
};

void train_mle(const CLI::App& sub, const MleOptions& o) {
  const auto train = load_tsv(o.train);
  const auto dev = o.dev.empty() ? std::vector<SentencePair>{} : load_tsv(o.dev);
  auto p = [&] {
    if (!o.init.empty()) return policy::Seq2SeqPolicy::load_file(o.init);
    std::vector<Tokens> src, tgt;
    auto add = [&](const std::vector<SentencePair>& c) {
      for (const auto& ex : c) {
        src.push_back(ex.source);
        tgt.push_back(ex.target);
      }
    };
    add(train);
    for (const auto& f : o.vocab_extra) add(load_tsv(f));
    return policy::Seq2SeqPolicy(o.arch.cfg, Vocab::build(src, 1, o.max_vocab), Vocab::build(tgt, 1, o.max_vocab),
                                 o.loop.cfg.seed);
  }();
  auto cfg = o.loop.resolved();
  cfg.max_steps = o.max_steps;
  const auto rep = policy::train_mle(p, train, dev, cfg, progress("mle"));
  p.save_file(o.out);
  Manifest m(sub, cfg.seed);
  m.input(o.train);
  m.input(o.dev);
  m.input(o.init);
  for (const auto& f : o.vocab_extra) m.input(f);
  m.output(o.out);
  m.result("training", loop_json(rep));
  m.write(o.out);
  if (rep.best) spdlog::info("best dev score {:.4f} at step {}", rep.best->score, rep.best->step);
}

policy::DecodeOptions decode_options(int beam) {
  policy::DecodeOptions d;
  if (beam > 0) d.beam = policy::BeamConfig{.width = beam};
  return d;
}

void translate(const CLI::App& sub, const fs::path& model, const fs::path& input, bool tsv, int beam,
               const fs::path& out) {
  const auto p = policy::Seq2SeqPolicy::load_file(model);
  std::vector<SentencePair> corpus;
  if (tsv) {
    corpus = load_tsv(input);
  } else {
    std::ifstream is(input);
    if (!is) throw UsageError("cannot read " + input.string());
    for (auto& s : read_lines(is)) corpus.push_back({std::move(s), {}});
  }
  const auto hyps = policy::translate_all(p, corpus, decode_options(beam));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream os(out);
  write_lines(os, hyps);
  os.close();
  Manifest m(sub, 0);
  m.input(model);
  m.input(input);
  m.output(out);
  m.write(out);
}

struct RlOptions {
  fs::path model, train, dev, out, estimator;
  std::string reward = "simulated-direct";
  std::string metric = "gleu";
  int steps = -1;
  policy::RLConfig rl;
  LoopFlags loop;
};

void train_rl(const CLI::App& sub, const RlOptions& o) {
  Manifest m(sub, o.loop.cfg.seed);
  m.input(o.model);
  m.input(o.train);
  m.input(o.dev);
  m.input(o.estimator);
  if (o.reward == "none" || o.steps == 0) {
    if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
    fs::copy_file(o.model, o.out, fs::copy_options::overwrite_existing);
    m.output(o.out);
    m.result("training", json{{"steps", 0}});
    m.write(o.out);
    spdlog::info("no training requested; {} is a copy of the input", o.out.string());
    return;
  }
  auto p = policy::Seq2SeqPolicy::load_file(o.model);
  const auto train = load_tsv(o.train);
  const auto dev = o.dev.empty() ? std::vector<SentencePair>{} : load_tsv(o.dev);
  std::optional<estimator::RewardEstimator> est;
  policy::RewardFn reward;
  if (o.reward == "estimator") {
    if (o.estimator.empty()) throw UsageError("--reward estimator needs --estimator");
    est = estimator::RewardEstimator::load_file(o.estimator);
    reward = simulation::estimated_reward(*est);
  } else {
    reward = simulation::direct_reward(o.metric == "sbleu" ? simulation::LogReward::sbleu
                                                           : simulation::LogReward::gleu);
  }
  auto cfg = o.loop.resolved();
  cfg.max_steps = std::max(o.steps, 0);
  auto rl = o.rl;
  rl.batch_size = cfg.batch_size;
  const auto rep = policy::train_rl(p, train, reward, dev, cfg, rl, progress("rl"));
  p.save_file(o.out);
  m.output(o.out);
  m.result("training", loop_json(rep));
  m.write(o.out);
  if (rep.best) spdlog::info("best dev score {:.4f} at step {}", rep.best->score, rep.best->step);
}

struct OplOptions {
  fs::path model, log, service_config, dev, out;
  int steps = 0;
  LoopFlags loop;
};

void train_opl(const CLI::App& sub, const OplOptions& o) {
  if (o.log.empty() == o.service_config.empty()) throw UsageError("train-opl: give exactly one of --log, --service-config");
  policy::FeedbackLog log;
  if (!o.log.empty()) {
    log = policy::import_log_file(o.log);
  } else {
    const auto cfg = service::ServiceConfig::load(o.service_config);
    service::FeedbackStore store(service::load_content(cfg), cfg.log);
    std::vector<std::string> warnings;
    log = store.export_feedback_log(&warnings);
    for (const auto& w : warnings) spdlog::warn("{}", w);
  }
  if (log.empty()) throw DataError("the feedback log is empty");
  auto p = policy::Seq2SeqPolicy::load_file(o.model);
  const auto dev = o.dev.empty() ? std::vector<SentencePair>{} : load_tsv(o.dev);
  auto cfg = o.loop.resolved();
  cfg.max_steps = o.steps;
  const auto rep = policy::train_opl(p, log, dev, cfg, progress("opl"));
  p.save_file(o.out);
  Manifest m(sub, cfg.seed);
  m.input(o.model);
  m.input(o.log);
  m.input(o.service_config);
  m.input(o.dev);
  m.output(o.out);
  m.result("log_entries", log.size());
  m.result("training", loop_json(rep));
  m.write(o.out);
}

json scores_json(const policy::CorpusScores& s) {
  return {{"bleu", s.bleu}, {"gleu", s.gleu}, {"chrf", s.chrf}, {"ter", s.ter}};
}

// Sentence statistics whose sums determine each corpus metric.
struct MetricStats {
  const char* name;
  std::function<metrics::SentenceStats(const Tokens&, const Tokens&)> stats;
  metrics::CorpusMetric corpus;
};

std::vector<MetricStats> metric_stats() {
  return {
      {"bleu", [](const Tokens& h, const Tokens& r) { return metrics::bleu_stats(h, r); },
       [](std::span<const double> s) { return metrics::bleu_from_stats(s); }},
      {"gleu", [](const Tokens& h, const Tokens& r) { return metrics::gleu_stats(h, r); },
       [](std::span<const double> s) { return metrics::gleu_from_stats(s); }},
      {"chrf", [](const Tokens& h, const Tokens& r) { return metrics::SentenceStats{metrics::chrf(h, r), 1.0}; },
       [](std::span<const double> s) { return s[1] > 0 ? s[0] / s[1] : 0.0; }},
      {"ter",
       [](const Tokens& h, const Tokens& r) {
         return metrics::SentenceStats{metrics::ter_edits<std::string>(h, r), static_cast<double>(r.size())};
       },
       [](std::span<const double> s) { return s[1] > 0 ? s[0] / s[1] : 0.0; }},
  };
}

json significance(const std::vector<Tokens>& a, const std::vector<Tokens>& b, const std::vector<Tokens>& refs,
                  int n_perm, std::uint64_t seed) {
  json out;
  for (const auto& m : metric_stats()) {
    std::vector<metrics::SentenceStats> sa, sb;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      sa.push_back(m.stats(a[i], refs[i]));
      sb.push_back(m.stats(b[i], refs[i]));
    }
    const auto r = metrics::approx_randomization_test(sa, sb, m.corpus, n_perm, seed);
    out[m.name] = {{"delta", r.observed_delta}, {"p", r.p_value}};
  }
  return out;
}

struct EvaluateOptions {
  fs::path model, baseline, test, out, hyp_out;
  int beam = 10;
  int n_perm = 10000;
  std::uint64_t seed = 1;
};

void evaluate(const CLI::App& sub, const EvaluateOptions& o) {
  const auto test = load_tsv(o.test);
  std::vector<Tokens> refs;
  for (const auto& ex : test) refs.push_back(ex.target);
  const auto p = policy::Seq2SeqPolicy::load_file(o.model);
  const auto ev = policy::evaluate_policy(p, test, decode_options(o.beam));
  json j{{"model", scores_json(ev.scores)}, {"sentences", test.size()}, {"beam", o.beam}};
  Manifest m(sub, o.seed);
  m.input(o.model);
  m.input(o.test);
  if (!o.baseline.empty()) {
    const auto b = policy::Seq2SeqPolicy::load_file(o.baseline);
    const auto bev = policy::evaluate_policy(b, test, decode_options(o.beam));
    j["baseline"] = scores_json(bev.scores);
    j["approximate_randomization"] = significance(ev.hypotheses, bev.hypotheses, refs, o.n_perm, o.seed);
    j["approximate_randomization"]["permutations"] = o.n_perm;
    m.input(o.baseline);
  }
  write_json(o.out, j);
  m.output(o.out);
  if (!o.hyp_out.empty()) {
    std::ofstream os(o.hyp_out);
    write_lines(os, ev.hypotheses);
    os.close();
    m.output(o.hyp_out);
  }
  m.result("model", j["model"]);
  m.write(o.out);
  spdlog::info("BLEU {:.4f} GLEU {:.4f} chrF {:.4f} TER {:.4f}", ev.scores.bleu, ev.scores.gleu, ev.scores.chrf,
               ev.scores.ter);
}

void score(const CLI::App& sub, const fs::path& hyp, const fs::path& ref, const fs::path& out) {
  std::ifstream hs(hyp), rs(ref);
  if (!hs) throw UsageError("cannot read " + hyp.string());
  if (!rs) throw UsageError("cannot read " + ref.string());
  const auto h = read_lines(hs), r = read_lines(rs);
  if (h.size() != r.size()) throw DataError("hypothesis and reference line counts differ");
  const auto s = policy::score_corpus(h, r);
  write_json(out, scores_json(s));
  Manifest m(sub, 0);
  m.input(hyp);
  m.input(ref);
  m.output(out);
  m.write(out);
}

}  // namespace

void add_policy_commands(CLI::App& app, Registry& reg) {
  {
    auto* sub = app.add_subcommand("train-mle", "Maximum-likelihood training of the translation policy");
    auto o = std::make_shared<MleOptions>();
    sub->add_option("--train", o->train, "Parallel TSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--dev", o->dev, "Parallel TSV for model selection")->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "Policy checkpoint")->required();
    sub->add_option("--init", o->init, "Continue from this checkpoint")->check(CLI::ExistingFile);
    sub->add_option("--vocab-extra", o->vocab_extra, "More TSVs contributing to the vocabularies")
        ->check(CLI::ExistingFile);
    sub->add_option("--max-vocab", o->max_vocab, "0 for unlimited")->capture_default_str();
    sub->add_option("--max-steps", o->max_steps, "0 for no limit beyond epochs")->capture_default_str();
    o->arch.add(*sub);
    o->loop.add(*sub, 3e-3);
    sub->callback([&reg, sub, o] { reg.action = [=] { train_mle(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("translate", "Translate sources with a policy");
    auto model = std::make_shared<fs::path>(), input = std::make_shared<fs::path>(), out = std::make_shared<fs::path>();
    auto tsv = std::make_shared<bool>(false);
    auto beam = std::make_shared<int>(0);
    sub->add_option("--model", *model)->required()->check(CLI::ExistingFile);
    sub->add_option("--input", *input, "One source per line")->required()->check(CLI::ExistingFile);
    sub->add_flag("--tsv", *tsv, "Input is a parallel TSV; the target side is ignored");
    sub->add_option("--beam", *beam, "Beam width, 0 for greedy")->capture_default_str();
    sub->add_option("--out", *out)->required();
    sub->callback([=, &reg] { reg.action = [=] { translate(*sub, *model, *input, *tsv, *beam, *out); }; });
  }
  {
    auto* sub = app.add_subcommand("train-rl", "REINFORCE from simulated or estimated rewards");
    auto o = std::make_shared<RlOptions>();
    o->rl.k = 5;
    o->rl.tau = 0.5;
    sub->add_option("--model", o->model, "Warm-start checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--train", o->train, "Sources (and references for direct rewards)")->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--dev", o->dev)->check(CLI::ExistingFile);
    sub->add_option("--out", o->out)->required();
    sub->add_option("--reward", o->reward)
        ->check(CLI::IsMember({"simulated-direct", "estimator", "none"}))
        ->capture_default_str();
    sub->add_option("--metric", o->metric, "Metric of direct rewards")
        ->check(CLI::IsMember({"gleu", "sbleu"}))
        ->capture_default_str();
    sub->add_option("--estimator", o->estimator, "Reward estimator checkpoint")->check(CLI::ExistingFile);
    sub->add_option("--steps", o->steps, "Step limit; 0 copies the input, negative runs all epochs")
        ->capture_default_str();
    sub->add_option("--k", o->rl.k, "Samples per source")->capture_default_str();
    sub->add_option("--tau", o->rl.tau, "Sampling temperature")->capture_default_str();
    sub->add_flag("--tempered-gradient", o->rl.tempered_gradient, "Score function of the tempered distribution");
    o->loop.add(*sub, 3e-4);
    sub->callback([&reg, sub, o] { reg.action = [=] { train_rl(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("train-opl", "Off-policy learning from a logged feedback log");
    auto o = std::make_shared<OplOptions>();
    sub->add_option("--model", o->model)->required()->check(CLI::ExistingFile);
    sub->add_option("--log", o->log, "Simulated feedback log (JSONL)")->check(CLI::ExistingFile);
    sub->add_option("--service-config", o->service_config, "Use the human ratings logged by this service")
        ->check(CLI::ExistingFile);
    sub->add_option("--dev", o->dev)->check(CLI::ExistingFile);
    sub->add_option("--out", o->out)->required();
    sub->add_option("--max-steps", o->steps, "0 for no limit beyond epochs")->capture_default_str();
    o->loop.add(*sub, 3e-4);
    sub->callback([&reg, sub, o] { reg.action = [=] { train_opl(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("evaluate", "Corpus metrics and approximate randomization against a baseline");
    auto o = std::make_shared<EvaluateOptions>();
    sub->add_option("--model", o->model)->required()->check(CLI::ExistingFile);
    sub->add_option("--baseline", o->baseline)->check(CLI::ExistingFile);
    sub->add_option("--test", o->test, "Parallel TSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "Scores (JSON)")->required();
    sub->add_option("--hyp-out", o->hyp_out, "Write the translations here");
    sub->add_option("--beam", o->beam, "Beam width, 0 for greedy")->capture_default_str();
    sub->add_option("--n-perm", o->n_perm, "Permutations of the randomization test")->capture_default_str();
    sub->add_option("--seed", o->seed)->capture_default_str();
    sub->callback([&reg, sub, o] { reg.action = [=] { evaluate(*sub, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("score", "Corpus metrics of a hypothesis file");
    auto hyp = std::make_shared<fs::path>(), ref = std::make_shared<fs::path>(), out = std::make_shared<fs::path>();
    sub->add_option("--hyp", *hyp)->required()->check(CLI::ExistingFile);
    sub->add_option("--ref", *ref)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", *out)->required();
    sub->callback([=, &reg] { reg.action = [=] { score(*sub, *hyp, *ref, *out); }; });
  }
}

}  // namespace bnmt::cli
