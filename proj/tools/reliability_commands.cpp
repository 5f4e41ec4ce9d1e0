#include <spdlog/spdlog.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "bnmt/common/error.hpp"
#include "bnmt/ratings/jsonl.hpp"
#include "bnmt/reliability/alpha.hpp"
#include "bnmt/reliability/filters.hpp"
#include "bnmt/reliability/stats.hpp"
#include "common.hpp"

namespace bnmt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ReliabilityOptions {
  fs::path ratings, cardinal_plan, pairwise_plan, out, curves_dir;
  double step = 0.01;
  double normalized_threshold = 0.49;
  double pairwise_threshold = 0.66;
  double retain_fraction = 0.7;
  bool exclude_repeats = false;
};

json report_json(const reliability::ReliabilityReport& r) {
  return {{"alpha", r.alpha}, {"units", r.n_units_used}, {"values", r.n_values_used}, {"degenerate", r.degenerate}};
}

json summary_json(std::span<const double> xs) {
  if (xs.empty()) return {{"n", 0}};
  const auto s = reliability::summarize(xs);
  json j{{"n", s.n}, {"mean", s.mean}};
  if (s.n > 1) j["sd"] = s.stdev;
  return j;
}

json point_json(const reliability::FilterPoint& p) {
  json j{{"threshold", p.threshold}, {"retained", p.retained}};
  j["alpha"] = p.alpha ? json(*p.alpha) : json(nullptr);
  return j;
}

std::vector<double> values_of(const std::map<std::string, double>& m) {
  std::vector<double> v;
  for (const auto& [k, x] : m) v.push_back(x);
  return v;
}

ratings::SessionPlan load_plan(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw UsageError("cannot read " + p.string());
  return ratings::import_plan(is);
}

void analyze(const CLI::App& sub, const ReliabilityOptions& o) {
  std::ifstream is(o.ratings);
  if (!is) throw UsageError("cannot read " + o.ratings.string());
  const auto records = ratings::import_ratings(is);
  const reliability::MatrixOptions mo{.include_repeats = !o.exclude_repeats};

  struct Task {
    const char* name;
    reliability::ReliabilityMatrix matrix;
    std::map<std::string, double> intra;
    double report_threshold;
  };
  const auto raw = reliability::matrix_from_records(records, ratings::TaskKind::cardinal, mo);
  const auto normalized = reliability::zscore_normalize(raw);
  for (const auto& w : normalized.warnings) spdlog::warn("{}", w);
  const auto cardinal_plan = load_plan(o.cardinal_plan);
  const auto pairwise_plan = load_plan(o.pairwise_plan);
  std::vector<ratings::RatingRecord> cardinal_records, pairwise_records;
  for (const auto& r : records) {
    (r.task_kind == ratings::TaskKind::cardinal ? cardinal_records : pairwise_records).push_back(r);
  }
  const auto intra_cardinal = reliability::intra_rater_alphas(cardinal_records, cardinal_plan);
  const auto intra_pairwise = reliability::intra_rater_alphas(pairwise_records, pairwise_plan);

  std::vector<Task> tasks{{"cardinal_raw", raw, intra_cardinal, o.normalized_threshold},
                          {"cardinal_normalized", normalized.matrix, intra_cardinal, o.normalized_threshold},
                          {"pairwise", reliability::matrix_from_records(records, ratings::TaskKind::pairwise, mo),
                           intra_pairwise, o.pairwise_threshold}};

  json report;
  report["ratings"] = records.size();
  const auto grid = reliability::threshold_grid(0.0, 1.0, o.step);
  std::ostringstream consistency_tsv, variance_tsv;
  consistency_tsv << "task\tthreshold\talpha\tretained_raters\n";
  variance_tsv << "task\tthreshold\talpha\tretained_units\n";
  std::vector<std::vector<double>> anova_groups;
  for (const auto& t : tasks) {
    const auto alpha = reliability::krippendorff_alpha(t.matrix);
    report["inter_rater"][t.name] = report_json(alpha);
    spdlog::info("{} alpha {:.4f} over {} units", t.name, alpha.alpha, alpha.n_units_used);

    const auto consistency = reliability::consistency_filter_sweep(t.matrix, t.intra, grid);
    const auto variance = reliability::item_variance_filter_sweep(t.matrix, grid);
    auto emit = [&](std::ostringstream& os, const reliability::FilterCurve& c) {
      for (const auto& p : c.points) {
        os << t.name << '\t' << p.threshold << '\t';
        if (p.alpha) {
          os << *p.alpha;
        } else {
          os << "NA";
        }
        os << '\t' << p.retained << '\n';
      }
    };
    emit(consistency_tsv, consistency);
    emit(variance_tsv, variance);
    const double at[] = {t.report_threshold};
    report["consistency_filter"][t.name] =
        point_json(reliability::consistency_filter_sweep(t.matrix, t.intra, at).points.at(0));
    if (const auto p = reliability::last_point_retaining(variance, o.retain_fraction)) {
      report["variance_filter"][t.name] = point_json(*p);
    }

    const auto pairs = reliability::pairwise_rater_alphas(t.matrix);
    report["rater_pair_alphas"][t.name] = summary_json(pairs);
    anova_groups.push_back(pairs);
  }
  report["intra_rater"]["cardinal"] = summary_json(values_of(intra_cardinal));
  report["intra_rater"]["cardinal"]["per_rater"] = intra_cardinal;
  report["intra_rater"]["pairwise"] = summary_json(values_of(intra_pairwise));
  report["intra_rater"]["pairwise"]["per_rater"] = intra_pairwise;

  const auto ic = values_of(intra_cardinal), ip = values_of(intra_pairwise);
  if (ic.size() >= 2 && ip.size() >= 2) {
    const auto w = reliability::welch_t_test(ip, ic);
    report["welch_intra_rater"] = {{"t", w.t}, {"df", w.df}, {"p", w.p_two_sided}};
  } else {
    spdlog::warn("Welch test skipped: fewer than two intra-rater alphas in a task");
  }
  bool anova_ok = true;
  for (const auto& g : anova_groups) anova_ok = anova_ok && g.size() >= 2;
  if (anova_ok) {
    const auto a = reliability::anova_oneway(anova_groups);
    report["anova_rater_pairs"] = {{"f", a.f}, {"df_between", a.df_between}, {"df_within", a.df_within}, {"p", a.p}};
  }

  write_json(o.out, report);
  Manifest m(sub, 0);
  m.input(o.ratings);
  m.input(o.cardinal_plan);
  m.input(o.pairwise_plan);
  m.output(o.out);
  if (!o.curves_dir.empty()) {
    write_text(o.curves_dir / "consistency_filter.tsv", consistency_tsv.str());
    write_text(o.curves_dir / "variance_filter.tsv", variance_tsv.str());
    m.output(o.curves_dir / "consistency_filter.tsv");
    m.output(o.curves_dir / "variance_filter.tsv");
  }
  m.write(o.out);
}

}  // namespace

void add_reliability_commands(CLI::App& app, Registry& reg) {
  auto* sub = app.add_subcommand("analyze-reliability",
                                 "Inter- and intra-rater alpha, filter curves, Welch test and ANOVA");
  auto o = std::make_shared<ReliabilityOptions>();
  sub->add_option("--ratings", o->ratings, "Rating records (JSONL)")->required()->check(CLI::ExistingFile);
  sub->add_option("--cardinal-plan", o->cardinal_plan)->required()->check(CLI::ExistingFile);
  sub->add_option("--pairwise-plan", o->pairwise_plan)->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Report (JSON)")->required();
  sub->add_option("--curves-dir", o->curves_dir, "Write filter curves as TSV here");
  sub->add_option("--threshold-step", o->step)->capture_default_str();
  sub->add_option("--normalized-threshold", o->normalized_threshold, "Consistency threshold reported for 5-point")
      ->capture_default_str();
  sub->add_option("--pairwise-threshold", o->pairwise_threshold, "Consistency threshold reported for pairwise")
      ->capture_default_str();
  sub->add_option("--retain-fraction", o->retain_fraction, "Variance filter point retaining this share of units")
      ->capture_default_str();
  sub->add_flag("--exclude-repeats", o->exclude_repeats, "Use only first showings for inter-rater alpha");
  sub->callback([&reg, sub, o] { reg.action = [=] { analyze(*sub, *o); }; });
}

}  // namespace bnmt::cli
