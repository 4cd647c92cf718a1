#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dlroc/classifier.hpp"
#include "dlroc/dataset.hpp"

namespace dlroc {

/// Rows: true label 1..K. Columns: predicted 1..K, then one column for
/// unclassifiable samples.
struct ConfusionMatrix {
  int num_labels = 0;
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts;

  long total() const { return counts.sum(); }
  long unclassifiable() const { return counts.col(num_labels).sum(); }
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<std::optional<int>>& predicted,
                          int num_labels);

struct LabelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Unclassifiable samples count as false negatives of their true label only; 0/0 -> 0.
std::vector<LabelScores> prf_scores(const ConfusionMatrix& cm);
LabelScores macro_average(const std::vector<LabelScores>& scores);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};
MeanStd mean_std(const std::vector<double>& values);
std::string format_mean_std(const MeanStd& v);  // "0.9611(0.0123)"

struct TimingStats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  std::size_t samples = 0;
};
TimingStats timing_stats(std::vector<double> seconds);

/// Time `work(i)` for i in [0, n) one call at a time, dropping the first `warmup`.
TimingStats benchmark_calls(const std::function<void(std::size_t)>& work, std::size_t n, std::size_t warmup);
TimingStats benchmark_timing(const ClassifierModel& model, const Dataset& test, std::size_t warmup);

struct MethodConfig {
  std::string name;
  FitOptions fit;
  Eigen::Index atoms_per_label = 8;   // L_k when a dictionary is learned
};

/// Hybrid coder on a learned, incoherence-penalized dictionary.
MethodConfig dl_roc_method(const LearnParams& learn, Eigen::Index atoms_per_label, double residual_tol = 0.01);
/// OMP on the normalized raw training data.
MethodConfig src_omp_method(double residual_tol = 0.01);

struct Protocol {
  int replicates = 100;
  std::size_t train_groups = 7;
  std::size_t per_label_train = 2500;
  std::size_t per_label_test = 1000;
  std::vector<MethodConfig> methods;
};

struct ReplicatePlan {
  Dataset train;
  Dataset test;
  std::uint64_t fit_seed = 0;  // replaces the methods' learn seed
};

/// Data split and seeds used by replicate r of run_replicates.
ReplicatePlan plan_replicate(const Dataset& data, const Protocol& protocol, std::uint64_t seed, int replicate);

struct MethodRun {
  ConfusionMatrix confusion;
  std::vector<LabelScores> scores;
  LabelScores macro;
  std::vector<double> seconds;  // per test sample
};

/// Fit one method on plan.train and score it on plan.test. `trace` receives the
/// learning trace when a dictionary is learned.
MethodRun run_method(const MethodConfig& method, const ReplicatePlan& plan, LearnTrace* trace = nullptr);

struct MethodReport {
  std::string name;
  std::vector<MeanStd> precision, recall, f;  // per label
  MeanStd macro_precision, macro_recall, macro_f;
  std::vector<double> replicate_macro_f;  // NaN for failed replicates
  TimingStats timing;
  int replicates_ok = 0;
  std::vector<std::string> failures;
};

struct EvalReport {
  std::vector<std::string> label_names;
  std::vector<MethodReport> methods;

  std::string table() const;
  /// JSON lines; timing fields only when include_timing is set, so the default
  /// output is a pure function of data, protocol and seed.
  std::string records(bool include_timing = false) const;
};

EvalReport run_replicates(const Dataset& data, const Protocol& protocol, std::uint64_t seed);

struct GridPoint {
  double alpha = 0.7;
  double gamma = 0.5;
  double eta = 1.0;
};

struct CvResult {
  std::size_t best = 0;
  std::vector<GridPoint> grid;
  std::vector<double> mean_f;
  std::vector<std::vector<double>> fold_f;

  std::string table() const;
};

/// Group-aware k-fold search maximizing mean macro F (lowest index on ties).
CvResult cross_validate(const Dataset& train, const std::vector<GridPoint>& grid, int folds, std::uint64_t seed,
                        const MethodConfig& base);

MethodConfig with_grid_point(MethodConfig method, const GridPoint& p);

}  // namespace dlroc
