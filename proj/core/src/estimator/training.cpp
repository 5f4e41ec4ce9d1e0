#include "bnmt/estimator/training.hpp"

#include "bnmt/common/error.hpp"
#include "bnmt/common/rng.hpp"
#include "bnmt/metrics/statistics.hpp"

namespace bnmt::estimator {

void EstimatorTrainConfig::validate() const {
  if (!(p_aux >= 0.0 && p_aux <= 1.0)) throw UsageError("p_aux must be in [0,1]");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (max_steps < 0) throw UsageError("max_steps must be >= 0");
  if (eval_every < 1) throw UsageError("eval_every must be >= 1");
  if (patience < 0) throw UsageError("patience must be >= 0");
}

namespace {

std::size_t pool_size(const EstimatorData& d, LossKind k) {
  return k == LossKind::mse ? d.rewards.size() : d.pairs.size();
}

template <class T>
std::vector<T> draw(const std::vector<T>& pool, int n, Rng& rng) {
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(n));
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int i = 0; i < n; ++i) out.push_back(pool[pick(rng)]);
  return out;
}

}  // namespace

EstimatorEvaluation evaluate_estimator(const RewardEstimator& est,
                                       std::span<const ScoredTranslation> test,
                                       const metrics::MetricConfig& cfg) {
  if (test.size() < 2) throw DataError("estimator evaluation needs at least two translations");
  EstimatorEvaluation ev;
  for (const auto& s : test) {
    ev.predictions.push_back(est.predict(s.source, s.hypothesis));
    ev.ter.push_back(metrics::ter(s.hypothesis, s.reference, cfg));
  }
  ev.spearman = metrics::spearman_rho(ev.predictions, ev.ter);
  return ev;
}

EstimatorTrainReport train_estimator(RewardEstimator& est, const EstimatorData& human,
                                     const EstimatorData& aux, std::span<const ScoredTranslation> dev,
                                     const EstimatorTrainConfig& cfg, const StepCallback& on_step) {
  cfg.validate();
  const bool has_human = pool_size(human, cfg.loss) > 0;
  const bool has_aux = pool_size(aux, cfg.loss) > 0;
  if (cfg.p_aux < 1.0 && !has_human) throw DataError("no human training data but p_aux < 1");
  if (cfg.p_aux > 0.0 && !has_aux) throw DataError("no auxiliary training data but p_aux > 0");

  Rng rng(cfg.seed);
  nn::Adam opt(cfg.adam);
  EstimatorTrainReport rep;
  std::optional<nn::ParameterSet> best;
  int since_best = 0;

  auto evaluate = [&](int step) {
    if (dev.size() < 2) return false;
    double rho = 0.0;
    try {
      rho = evaluate_estimator(est, dev, cfg.metric).spearman;
    } catch (const NumericalError&) {
      rho = 0.0;  // constant predictions carry no ranking
    }
    rep.dev.push_back({step, rho});
    if (!rep.best_spearman || rho < *rep.best_spearman) {
      rep.best_spearman = rho;
      rep.best_step = step;
      best = est.params();
      since_best = 0;
    } else {
      ++since_best;
    }
    return cfg.patience > 0 && since_best >= cfg.patience;
  };

  evaluate(0);
  for (int step = 1; step <= cfg.max_steps; ++step) {
    const bool use_aux = cfg.p_aux >= 1.0 || (cfg.p_aux > 0.0 && uniform01(rng) < cfg.p_aux);
    const EstimatorData& src = use_aux ? aux : human;
    (use_aux ? rep.aux_batches : rep.human_batches)++;
    const std::uint64_t drop_seed = rng();
    const std::optional<std::uint64_t> seed =
        cfg.dropout ? std::optional<std::uint64_t>(drop_seed) : std::nullopt;

    est.params().zero_grad();
    double loss = 0.0;
    if (cfg.loss == LossKind::mse) {
      const auto batch = draw(src.rewards, cfg.batch_size, rng);
      loss = mse_loss(est, batch, seed, true).loss;
    } else {
      const auto batch = draw(src.pairs, cfg.batch_size, rng);
      loss = pw_loss(est, batch, seed, true).loss;
    }
    if (cfg.clip_norm > 0.0) est.params().clip_grad_norm(cfg.clip_norm);
    opt.step(est.params());
    if (!est.params().all_finite()) throw NumericalError("estimator parameters diverged");

    rep.steps.push_back({step, loss, use_aux});
    if (on_step) on_step(rep.steps.back());
    if (step % cfg.eval_every == 0 && evaluate(step)) break;
  }
  if (best) {
    for (std::size_t i = 0; i < best->all().size(); ++i) {
      est.params().all()[i]->value = best->all()[i]->value;
    }
  }
  return rep;
}

}  // namespace bnmt::estimator
