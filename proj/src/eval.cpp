#include "dlroc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "dlroc/error.hpp"
#include "dlroc/rng.hpp"
#include "json.hpp"

namespace dlroc {

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<std::optional<int>>& predicted,
                          int num_labels) {
  if (truth.size() != predicted.size())
    fail(ErrorKind::LengthMismatch, std::to_string(truth.size()) + " truths vs " + std::to_string(predicted.size()) +
                                        " predictions");
  if (num_labels < 1) fail(ErrorKind::LabelOutOfRange, "need at least one label");
  ConfusionMatrix cm;
  cm.num_labels = num_labels;
  cm.counts.setZero(num_labels, num_labels + 1);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    if (t < 1 || t > num_labels) fail(ErrorKind::LabelOutOfRange, "true label " + std::to_string(t));
    int col = num_labels;
    if (predicted[i]) {
      col = *predicted[i] - 1;
      if (col < 0 || col >= num_labels) fail(ErrorKind::LabelOutOfRange, "predicted label " + std::to_string(*predicted[i]));
    }
    ++cm.counts(t - 1, col);
  }
  return cm;
}

std::vector<LabelScores> prf_scores(const ConfusionMatrix& cm) {
  const int k = cm.num_labels;
  std::vector<LabelScores> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double tp = static_cast<double>(cm.counts(i, i));
    const double predicted = static_cast<double>(cm.counts.col(i).sum());
    const double actual = static_cast<double>(cm.counts.row(i).sum());
    LabelScores& s = out[static_cast<std::size_t>(i)];
    s.precision = predicted > 0 ? tp / predicted : 0.0;
    s.recall = actual > 0 ? tp / actual : 0.0;
    s.f = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  }
  return out;
}

LabelScores macro_average(const std::vector<LabelScores>& scores) {
  LabelScores m;
  if (scores.empty()) return m;
  for (const auto& s : scores) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f += s.f;
  }
  const double n = static_cast<double>(scores.size());
  m.precision /= n;
  m.recall /= n;
  m.f /= n;
  return m;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

std::string format_mean_std(const MeanStd& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f(%.4f)", v.mean, v.std);
  return buf;
}

TimingStats timing_stats(std::vector<double> seconds) {
  TimingStats t;
  t.samples = seconds.size();
  if (seconds.empty()) return t;
  std::sort(seconds.begin(), seconds.end());
  t.mean = std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
  const std::size_t n = seconds.size();
  t.median = n % 2 ? seconds[n / 2] : 0.5 * (seconds[n / 2 - 1] + seconds[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  t.p95 = seconds[std::max<std::size_t>(rank, 1) - 1];
  return t;
}

TimingStats benchmark_calls(const std::function<void(std::size_t)>& work, std::size_t n, std::size_t warmup) {
  if (warmup >= n) fail(ErrorKind::EmptyMeasurement, "warmup " + std::to_string(warmup) + " leaves no samples of " +
                                                         std::to_string(n));
  std::vector<double> secs;
  secs.reserve(n - warmup);
  for (std::size_t i = 0; i < n; ++i) {
    const auto start = std::chrono::steady_clock::now();
    work(i);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (i >= warmup) secs.push_back(s);
  }
  return timing_stats(std::move(secs));
}

TimingStats benchmark_timing(const ClassifierModel& model, const Dataset& test, std::size_t warmup) {
  if (test.size() == 0) fail(ErrorKind::EmptyMeasurement, "test set is empty");
  return benchmark_calls(
      [&](std::size_t i) { (void)classify(test.samples.col(static_cast<Eigen::Index>(i)), model); }, test.size(),
      warmup);
}

MethodConfig dl_roc_method(const LearnParams& learn, Eigen::Index atoms_per_label, double residual_tol) {
  MethodConfig m;
  m.name = "DL-ROC";
  m.fit.learn = learn;
  m.fit.learn_dictionary = true;
  m.fit.coder.kind = CoderKind::Hybrid;
  m.fit.coder.alpha = learn.alpha;
  m.fit.coder.gamma = learn.gamma;
  m.fit.coder.stop.residual_threshold = residual_tol;
  m.atoms_per_label = atoms_per_label;
  return m;
}

MethodConfig src_omp_method(double residual_tol) {
  MethodConfig m;
  m.name = "SRC(OMP)";
  m.fit.learn_dictionary = false;
  m.fit.coder.kind = CoderKind::Omp;
  m.fit.coder.stop.residual_threshold = residual_tol;
  return m;
}

ReplicatePlan plan_replicate(const Dataset& data, const Protocol& protocol, std::uint64_t seed, int replicate) {
  const std::uint64_t rep = derive_seed(seed, {static_cast<std::uint64_t>(replicate)});
  const auto groups = draw_groups(data, protocol.train_groups, derive_seed(rep, {0}));
  auto [train_all, test_all] = split_by_group(data, groups);
  ReplicatePlan plan;
  plan.train = subsample_per_label(train_all, protocol.per_label_train, derive_seed(rep, {1}));
  plan.test = subsample_per_label(test_all, protocol.per_label_test, derive_seed(rep, {2}));
  plan.fit_seed = derive_seed(rep, {3});
  return plan;
}

MethodRun run_method(const MethodConfig& method, const ReplicatePlan& plan, LearnTrace* trace) {
  FitOptions options = method.fit;
  options.learn.seed = plan.fit_seed;
  const LabeledTrainingSet train = plan.train.by_label();
  const std::vector<Eigen::Index> sizes(train.num_labels(), method.atoms_per_label);
  const ClassifierModel model = fit(train, sizes, options, plan.train.label_names, trace);

  const auto results = classify_batch(plan.test.samples, model);
  std::vector<std::optional<int>> predicted;
  MethodRun run;
  for (const auto& r : results) {
    predicted.push_back(r.label);
    run.seconds.push_back(r.seconds);
  }
  run.confusion = confusion(plan.test.labels, predicted, plan.test.num_labels());
  run.scores = prf_scores(run.confusion);
  run.macro = macro_average(run.scores);
  return run;
}

EvalReport run_replicates(const Dataset& data, const Protocol& protocol, std::uint64_t seed) {
  data.validate();
  if (protocol.replicates < 1) fail(ErrorKind::BadParameter, "replicates must be >= 1");
  if (protocol.methods.empty()) fail(ErrorKind::BadParameter, "no methods configured");
  const std::size_t k = static_cast<std::size_t>(data.num_labels());
  const std::size_t nm = protocol.methods.size();

  struct Acc {
    std::vector<std::vector<double>> p, r, f;  // [label][replicate]
    std::vector<double> mp, mr, mf;
    std::vector<double> seconds;
  };
  std::vector<Acc> acc(nm);
  EvalReport report;
  report.label_names = data.label_names;
  report.methods.resize(nm);
  for (std::size_t i = 0; i < nm; ++i) {
    report.methods[i].name = protocol.methods[i].name;
    acc[i].p.resize(k);
    acc[i].r.resize(k);
    acc[i].f.resize(k);
  }

  for (int rep = 0; rep < protocol.replicates; ++rep) {
    std::optional<ReplicatePlan> plan;
    std::string plan_error;
    try {
      plan = plan_replicate(data, protocol, seed, rep);
    } catch (const Error& e) {
      plan_error = e.what();
    }
    for (std::size_t i = 0; i < nm; ++i) {
      MethodReport& mr = report.methods[i];
      if (!plan) {
        mr.failures.push_back("replicate " + std::to_string(rep) + ": " + plan_error);
        mr.replicate_macro_f.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      try {
        const MethodRun run = run_method(protocol.methods[i], *plan);
        for (std::size_t l = 0; l < k; ++l) {
          acc[i].p[l].push_back(run.scores[l].precision);
          acc[i].r[l].push_back(run.scores[l].recall);
          acc[i].f[l].push_back(run.scores[l].f);
        }
        acc[i].mp.push_back(run.macro.precision);
        acc[i].mr.push_back(run.macro.recall);
        acc[i].mf.push_back(run.macro.f);
        acc[i].seconds.insert(acc[i].seconds.end(), run.seconds.begin(), run.seconds.end());
        mr.replicate_macro_f.push_back(run.macro.f);
        ++mr.replicates_ok;
      } catch (const Error& e) {
        mr.failures.push_back("replicate " + std::to_string(rep) + ": " + e.what());
        mr.replicate_macro_f.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }

  for (std::size_t i = 0; i < nm; ++i) {
    MethodReport& mr = report.methods[i];
    for (std::size_t l = 0; l < k; ++l) {
      mr.precision.push_back(mean_std(acc[i].p[l]));
      mr.recall.push_back(mean_std(acc[i].r[l]));
      mr.f.push_back(mean_std(acc[i].f[l]));
    }
    mr.macro_precision = mean_std(acc[i].mp);
    mr.macro_recall = mean_std(acc[i].mr);
    mr.macro_f = mean_std(acc[i].mf);
    mr.timing = timing_stats(std::move(acc[i].seconds));
  }
  return report;
}

std::string EvalReport::table() const {
  std::string out;
  char buf[128];
  out += "method      metric     ";
  for (const auto& n : label_names) {
    std::snprintf(buf, sizeof buf, "%-16s", n.c_str());
    out += buf;
  }
  out += "mean            CT/sample(s)\n";
  for (const auto& m : methods) {
    auto row = [&](const char* metric, const std::vector<MeanStd>& per, const MeanStd& macro, bool with_time) {
      std::snprintf(buf, sizeof buf, "%-12s%-11s", m.name.c_str(), metric);
      out += buf;
      for (const auto& v : per) {
        std::snprintf(buf, sizeof buf, "%-16.4f", v.mean);
        out += buf;
      }
      std::snprintf(buf, sizeof buf, "%-16s", format_mean_std(macro).c_str());
      out += buf;
      if (with_time) {
        std::snprintf(buf, sizeof buf, "%.6f", m.timing.mean);
        out += buf;
      }
      out += '\n';
    };
    row("F-score", m.f, m.macro_f, true);
    row("Recall", m.recall, m.macro_recall, false);
    row("Precision", m.precision, m.macro_precision, false);
    if (!m.failures.empty()) {
      std::snprintf(buf, sizeof buf, "%-12s%zu failed replicate(s)\n", m.name.c_str(), m.failures.size());
      out += buf;
    }
  }
  return out;
}

std::string EvalReport::records(bool include_timing) const {
  using nlohmann::json;
  std::string out;
  for (const auto& m : methods) {
    for (std::size_t r = 0; r < m.replicate_macro_f.size(); ++r) {
      json rec = {{"type", "replicate"}, {"method", m.name}, {"replicate", r}};
      const double f = m.replicate_macro_f[r];
      rec["macro_f"] = std::isnan(f) ? json(nullptr) : json(f);
      out += rec.dump() + '\n';
    }
    json summary = {{"type", "summary"},
                    {"method", m.name},
                    {"replicates_ok", m.replicates_ok},
                    {"failures", m.failures},
                    {"macro_f", {{"mean", m.macro_f.mean}, {"std", m.macro_f.std}}},
                    {"macro_recall", {{"mean", m.macro_recall.mean}, {"std", m.macro_recall.std}}},
                    {"macro_precision", {{"mean", m.macro_precision.mean}, {"std", m.macro_precision.std}}}};
    json per = json::array();
    for (std::size_t l = 0; l < m.f.size(); ++l) {
      per.push_back({{"label", label_names[l]},
                     {"f", m.f[l].mean},
                     {"recall", m.recall[l].mean},
                     {"precision", m.precision[l].mean}});
    }
    summary["labels"] = per;
    if (include_timing)
      summary["seconds_per_sample"] = {{"mean", m.timing.mean}, {"median", m.timing.median}, {"p95", m.timing.p95}};
    out += summary.dump() + '\n';
  }
  return out;
}

MethodConfig with_grid_point(MethodConfig method, const GridPoint& p) {
  method.fit.learn.alpha = p.alpha;
  method.fit.learn.gamma = p.gamma;
  method.fit.learn.eta = p.eta;
  method.fit.coder.alpha = p.alpha;
  method.fit.coder.gamma = p.gamma;
  return method;
}

CvResult cross_validate(const Dataset& train, const std::vector<GridPoint>& grid, int folds, std::uint64_t seed,
                        const MethodConfig& base) {
  if (grid.empty()) fail(ErrorKind::BadParameter, "empty parameter grid");
  if (folds < 2) fail(ErrorKind::BadParameter, "folds must be >= 2");
  const std::vector<int> groups = train.group_ids();
  if (groups.size() < static_cast<std::size_t>(folds))
    fail(ErrorKind::InsufficientGroups, std::to_string(groups.size()) + " groups cannot fill " +
                                            std::to_string(folds) + " folds");

  CounterRng rng(seed);
  const auto order = sample_without_replacement(groups.size(), groups.size(), rng);
  std::vector<std::set<int>> fold_groups(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < order.size(); ++i)
    fold_groups[i % static_cast<std::size_t>(folds)].insert(groups[order[i]]);

  std::vector<ReplicatePlan> plans;
  for (int f = 0; f < folds; ++f) {
    std::set<int> train_groups;
    for (int g : groups)
      if (!fold_groups[static_cast<std::size_t>(f)].count(g)) train_groups.insert(g);
    auto [tr, te] = split_by_group(train, train_groups);
    plans.push_back({std::move(tr), std::move(te), derive_seed(seed, {static_cast<std::uint64_t>(f) + 1})});
  }

  CvResult res;
  res.grid = grid;
  for (const GridPoint& p : grid) {
    const MethodConfig method = with_grid_point(base, p);
    std::vector<double> scores;
    for (const auto& plan : plans) {
      try {
        scores.push_back(run_method(method, plan).macro.f);
      } catch (const Error&) {
        scores.push_back(0.0);
      }
    }
    res.mean_f.push_back(mean_std(scores).mean);
    res.fold_f.push_back(std::move(scores));
  }
  for (std::size_t i = 1; i < res.mean_f.size(); ++i)
    if (res.mean_f[i] > res.mean_f[res.best]) res.best = i;
  return res;
}

std::string CvResult::table() const {
  std::string out = "index alpha gamma eta mean_macro_f\n";
  char buf[160];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %.6g %.6g %.6g %.6f%s\n", i, grid[i].alpha, grid[i].gamma, grid[i].eta,
                  mean_f[i], i == best ? " *" : "");
    out += buf;
  }
  return out;
}

}  // namespace dlroc
