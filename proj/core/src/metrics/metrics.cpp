#include "bnmt/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "bnmt/common/error.hpp"

namespace bnmt::metrics {

void MetricConfig::validate() const {
  if (max_ngram < 1) throw UsageError("max_ngram must be >= 1");
  if (!(smoothing_epsilon >= 0.0)) throw UsageError("smoothing_epsilon must be >= 0");
  if (!(chrf_beta > 0.0)) throw UsageError("chrf_beta must be > 0");
  if (chrf_max_n < 1) throw UsageError("chrf_max_n must be >= 1");
  if (ter_max_shift_distance < 1 || ter_max_shift_length < 1) {
    throw UsageError("TER shift limits must be >= 1");
  }
}

namespace {

template <class T>
using NgramCounts = std::map<std::vector<T>, int>;

template <class T>
NgramCounts<T> count_ngrams(std::span<const T> seq, int n) {
  NgramCounts<T> counts;
  const auto len = static_cast<int>(seq.size());
  for (int i = 0; i + n <= len; ++i) {
    ++counts[std::vector<T>(seq.begin() + i, seq.begin() + i + n)];
  }
  return counts;
}

template <class T>
int clipped_matches(const NgramCounts<T>& hyp, const NgramCounts<T>& ref) {
  int m = 0;
  for (const auto& [g, c] : hyp) {
    auto it = ref.find(g);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

int ngram_total(std::size_t len, int n) {
  return std::max(static_cast<int>(len) - n + 1, 0);
}

template <class T>
void require_ref(std::span<const T> ref, const char* what) {
  if (ref.empty()) throw DataError(std::string(what) + ": empty reference");
}

}  // namespace

template <class T>
double sbleu(std::span<const T> hyp, std::span<const T> ref, const MetricConfig& cfg) {
  require_ref(ref, "sbleu");
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= cfg.max_ngram; ++n) {
    const double total = ngram_total(hyp.size(), n);
    const double m = clipped_matches(count_ngrams(hyp, n), count_ngrams(ref, n));
    const double eps = n >= 2 ? cfg.smoothing_epsilon : 0.0;
    const double denom = total + eps;
    const double p = denom > 0.0 ? (m + eps) / denom : 0.0;
    if (p <= 0.0) return 0.0;
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(hyp.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / cfg.max_ngram);
}

template <class T>
double gleu(std::span<const T> hyp, std::span<const T> ref, const MetricConfig& cfg) {
  require_ref(ref, "gleu");
  if (hyp.empty()) return 0.0;
  double matches = 0.0, hyp_total = 0.0, ref_total = 0.0;
  for (int n = 1; n <= cfg.max_ngram; ++n) {
    matches += clipped_matches(count_ngrams(hyp, n), count_ngrams(ref, n));
    hyp_total += ngram_total(hyp.size(), n);
    ref_total += ngram_total(ref.size(), n);
  }
  if (hyp_total == 0.0 || ref_total == 0.0) return 0.0;
  return std::min(matches / hyp_total, matches / ref_total);
}

template <class T>
int edit_distance(std::span<const T> a, std::span<const T> b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

template <class T>
bool occurs_in(std::span<const T> block, std::span<const T> seq) {
  return std::search(seq.begin(), seq.end(), block.begin(), block.end()) != seq.end();
}

// Moves cur[start, start+len) so that it begins at index dest of the result.
template <class T>
std::vector<T> apply_shift(const std::vector<T>& cur, std::size_t start, std::size_t len,
                           std::size_t dest) {
  std::vector<T> rest;
  rest.reserve(cur.size());
  rest.insert(rest.end(), cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(start));
  rest.insert(rest.end(), cur.begin() + static_cast<std::ptrdiff_t>(start + len), cur.end());
  std::vector<T> out(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(dest));
  out.insert(out.end(), cur.begin() + static_cast<std::ptrdiff_t>(start),
             cur.begin() + static_cast<std::ptrdiff_t>(start + len));
  out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(dest), rest.end());
  return out;
}

}  // namespace

template <class T>
double ter_edits(std::span<const T> hyp, std::span<const T> ref, const MetricConfig& cfg) {
  require_ref(ref, "ter");
  std::vector<T> cur(hyp.begin(), hyp.end());
  int dist = edit_distance<T>(cur, ref);
  int shifts = 0;
  if (!cfg.ter_enable_shifts) return dist;

  // Greedy: take the single shift with the lowest resulting edit distance,
  // as long as it lowers the total (each shift costs one edit).
  while (dist > 0) {
    int best = dist;
    std::vector<T> best_seq;
    const std::size_t n = cur.size();
    for (std::size_t start = 0; start < n; ++start) {
      for (std::size_t len = 1;
           len <= static_cast<std::size_t>(cfg.ter_max_shift_length) && start + len <= n; ++len) {
        std::span<const T> block(cur.data() + start, len);
        if (!occurs_in(block, ref)) break;  // longer blocks cannot occur either
        const std::size_t max_dest = n - len;
        const std::size_t cap = static_cast<std::size_t>(cfg.ter_max_shift_distance);
        const std::size_t lo = start > cap ? start - cap : 0;
        const std::size_t hi = std::min(max_dest, start + cap);
        for (std::size_t dest = lo; dest <= hi; ++dest) {
          if (dest == start) continue;
          auto candidate = apply_shift(cur, start, len, dest);
          const int d = edit_distance<T>(candidate, ref);
          if (d < best) {
            best = d;
            best_seq = std::move(candidate);
          }
        }
      }
    }
    if (best + 1 >= dist) break;
    cur = std::move(best_seq);
    dist = best;
    ++shifts;
  }
  return shifts + dist;
}

template <class T>
double ter(std::span<const T> hyp, std::span<const T> ref, const MetricConfig& cfg) {
  return ter_edits(hyp, ref, cfg) / static_cast<double>(ref.size());
}

// ---- chrF -----------------------------------------------------------------

namespace {

std::u32string to_codepoints(const Tokens& tokens) {
  std::u32string out;
  for (const auto& tok : tokens) {
    std::size_t i = 0;
    while (i < tok.size()) {
      const auto c = static_cast<unsigned char>(tok[i]);
      std::size_t extra = c >= 0xF0 ? 3 : c >= 0xE0 ? 2 : c >= 0xC0 ? 1 : 0;
      char32_t cp = extra == 3 ? (c & 0x07u) : extra == 2 ? (c & 0x0Fu) : extra == 1 ? (c & 0x1Fu) : c;
      bool ok = i + extra < tok.size();
      for (std::size_t k = 1; ok && k <= extra; ++k) {
        ok = (static_cast<unsigned char>(tok[i + k]) & 0xC0u) == 0x80u;
      }
      if (!ok) {
        // Invalid sequence: keep the lead byte as its own symbol.
        extra = 0;
        cp = c;
      }
      for (std::size_t k = 1; k <= extra; ++k) {
        cp = (cp << 6) | (static_cast<unsigned char>(tok[i + k]) & 0x3Fu);
      }
      const bool space = cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r';
      if (!space) out.push_back(cp);
      i += 1 + extra;
    }
  }
  return out;
}

std::map<std::u32string, int> char_ngrams(const std::u32string& s, int n) {
  std::map<std::u32string, int> out;
  const auto len = static_cast<int>(s.size());
  for (int i = 0; i + n <= len; ++i) ++out[s.substr(static_cast<std::size_t>(i), static_cast<std::size_t>(n))];
  return out;
}

}  // namespace

double chrf(const Tokens& hyp, const Tokens& ref, const MetricConfig& cfg) {
  if (ref.empty()) throw DataError("chrf: empty reference");
  const auto h = to_codepoints(hyp);
  const auto r = to_codepoints(ref);
  if (h.empty()) return 0.0;
  double p_sum = 0.0, r_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= cfg.chrf_max_n; ++n) {
    const auto hg = char_ngrams(h, n);
    const auto rg = char_ngrams(r, n);
    const double h_total = ngram_total(h.size(), n);
    const double r_total = ngram_total(r.size(), n);
    if (h_total == 0.0 && r_total == 0.0) continue;
    int m = 0;
    for (const auto& [g, c] : hg) {
      auto it = rg.find(g);
      if (it != rg.end()) m += std::min(c, it->second);
    }
    p_sum += h_total > 0.0 ? m / h_total : 0.0;
    r_sum += r_total > 0.0 ? m / r_total : 0.0;
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double p = p_sum / orders;
  const double rc = r_sum / orders;
  const double b2 = cfg.chrf_beta * cfg.chrf_beta;
  const double denom = b2 * p + rc;
  return denom > 0.0 ? (1.0 + b2) * p * rc / denom : 0.0;
}

// ---- corpus level ---------------------------------------------------------

std::vector<double> bleu_stats(const Tokens& hyp, const Tokens& ref, int max_ngram) {
  std::vector<double> s(static_cast<std::size_t>(2 * max_ngram + 2), 0.0);
  std::span<const std::string> h(hyp), r(ref);
  for (int n = 1; n <= max_ngram; ++n) {
    s[static_cast<std::size_t>(2 * (n - 1))] = clipped_matches(count_ngrams(h, n), count_ngrams(r, n));
    s[static_cast<std::size_t>(2 * (n - 1) + 1)] = ngram_total(hyp.size(), n);
  }
  s[static_cast<std::size_t>(2 * max_ngram)] = static_cast<double>(hyp.size());
  s[static_cast<std::size_t>(2 * max_ngram + 1)] = static_cast<double>(ref.size());
  return s;
}

double bleu_from_stats(std::span<const double> s, int max_ngram) {
  if (s.size() != static_cast<std::size_t>(2 * max_ngram + 2)) {
    throw DataError("bleu_from_stats: wrong statistics width");
  }
  double log_sum = 0.0;
  for (int n = 0; n < max_ngram; ++n) {
    const double m = s[static_cast<std::size_t>(2 * n)];
    const double t = s[static_cast<std::size_t>(2 * n + 1)];
    if (m <= 0.0 || t <= 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  const double c = s[static_cast<std::size_t>(2 * max_ngram)];
  const double r = s[static_cast<std::size_t>(2 * max_ngram + 1)];
  if (c <= 0.0) return 0.0;
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / max_ngram);
}

std::vector<double> gleu_stats(const Tokens& hyp, const Tokens& ref, int max_ngram) {
  std::span<const std::string> h(hyp), r(ref);
  double m = 0.0, ht = 0.0, rt = 0.0;
  for (int n = 1; n <= max_ngram; ++n) {
    m += clipped_matches(count_ngrams(h, n), count_ngrams(r, n));
    ht += ngram_total(hyp.size(), n);
    rt += ngram_total(ref.size(), n);
  }
  return {m, ht, rt};
}

double gleu_from_stats(std::span<const double> s) {
  if (s.size() != 3) throw DataError("gleu_from_stats: wrong statistics width");
  if (s[1] <= 0.0 || s[2] <= 0.0) return 0.0;
  return std::min(s[0] / s[1], s[0] / s[2]);
}

namespace {
void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DataError(std::string(what) + ": hypothesis and reference counts differ");
}

std::vector<double> summed(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                           const std::function<std::vector<double>(const Tokens&, const Tokens&)>& f) {
  std::vector<double> total;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto s = f(hyps[i], refs[i]);
    if (total.empty()) total.assign(s.size(), 0.0);
    for (std::size_t k = 0; k < s.size(); ++k) total[k] += s[k];
  }
  return total;
}
}  // namespace

double corpus_bleu(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                   const MetricConfig& cfg) {
  require_aligned(hyps.size(), refs.size(), "corpus_bleu");
  if (hyps.empty()) return 0.0;
  auto s = summed(hyps, refs, [&](const Tokens& h, const Tokens& r) {
    return bleu_stats(h, r, cfg.max_ngram);
  });
  return bleu_from_stats(s, cfg.max_ngram);
}

double corpus_gleu(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                   const MetricConfig& cfg) {
  require_aligned(hyps.size(), refs.size(), "corpus_gleu");
  if (hyps.empty()) return 0.0;
  auto s = summed(hyps, refs, [&](const Tokens& h, const Tokens& r) {
    return gleu_stats(h, r, cfg.max_ngram);
  });
  return gleu_from_stats(s);
}

double corpus_chrf(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                   const MetricConfig& cfg) {
  require_aligned(hyps.size(), refs.size(), "corpus_chrf");
  if (hyps.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) sum += chrf(hyps[i], refs[i], cfg);
  return sum / static_cast<double>(hyps.size());
}

double corpus_ter(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                  const MetricConfig& cfg) {
  require_aligned(hyps.size(), refs.size(), "corpus_ter");
  double edits = 0.0, len = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    edits += ter_edits<std::string>(hyps[i], refs[i], cfg);
    len += static_cast<double>(refs[i].size());
  }
  if (len == 0.0) throw DataError("corpus_ter: empty references");
  return edits / len;
}

#define BNMT_INSTANTIATE(T)                                                                  \
  template double sbleu<T>(std::span<const T>, std::span<const T>, const MetricConfig&);    \
  template double gleu<T>(std::span<const T>, std::span<const T>, const MetricConfig&);     \
  template double ter_edits<T>(std::span<const T>, std::span<const T>, const MetricConfig&); \
  template double ter<T>(std::span<const T>, std::span<const T>, const MetricConfig&);      \
  template int edit_distance<T>(std::span<const T>, std::span<const T>);

BNMT_INSTANTIATE(std::string)
BNMT_INSTANTIATE(int)
#undef BNMT_INSTANTIATE

}  // namespace bnmt::metrics
