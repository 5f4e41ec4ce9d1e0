#include "bnmt/policy/evaluation.hpp"

namespace bnmt::policy {

std::vector<Tokens> translate_all(const Seq2SeqPolicy& p, std::span<const SentencePair> corpus,
                                  const DecodeOptions& opts) {
  std::vector<Tokens> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) {
    out.push_back(opts.beam ? beam_translate(p, ex.source, *opts.beam) : greedy_translate(p, ex.source));
  }
  return out;
}

CorpusScores score_corpus(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                          const metrics::MetricConfig& cfg) {
  CorpusScores s;
  s.bleu = metrics::corpus_bleu(hyps, refs, cfg);
  s.gleu = metrics::corpus_gleu(hyps, refs, cfg);
  s.chrf = metrics::corpus_chrf(hyps, refs, cfg);
  s.ter = metrics::corpus_ter(hyps, refs, cfg);
  return s;
}

PolicyEvaluation evaluate_policy(const Seq2SeqPolicy& p, std::span<const SentencePair> test,
                                 const DecodeOptions& opts, const metrics::MetricConfig& cfg) {
  PolicyEvaluation ev;
  ev.hypotheses = translate_all(p, test, opts);
  std::vector<Tokens> refs;
  refs.reserve(test.size());
  for (const auto& ex : test) refs.push_back(ex.target);
  ev.scores = score_corpus(ev.hypotheses, refs, cfg);
  return ev;
}

}  // namespace bnmt::policy
