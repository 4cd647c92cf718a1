// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dlroc/classifier.hpp"
#include "dlroc/dataset.hpp"
#include "dlroc/eval.hpp"
#include "dlroc/learning.hpp"
#include "dlroc/norms.hpp"
#include "dlroc/rng.hpp"
#include "dlroc/sparse_coding.hpp"
#include "support/oracles.hpp"

using namespace dlroc;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kNormRelTol = 1e-12;
constexpr double kNormSeconds = 1.0;
constexpr double kOracleAbsTol = 1e-4;
constexpr double kOracleSeconds = 30.0;
constexpr double kOmpCoefTol = 1e-10;
constexpr double kTraceSlack = 1e-12;
constexpr double kLearnSeconds = 120.0;
constexpr double kMinMacroFGap = 0.02;
constexpr double kRobustSeconds = 300.0;
constexpr double kUnitBallSlack = 1e-9;
constexpr double kLatencyBudget = 0.010;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

RealMatrix random_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  RealMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// --- 1 ----------------------------------------------------------------------

Outcome norm_identities() {
  const auto start = Clock::now();
  CounterRng rng(1);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const RealMatrix m = random_matrix(rng, 1 + rng.below(20), 1 + rng.below(20));
    double fro = 0.0, l11 = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      fro += m.data()[i] * m.data()[i];
      l11 += std::abs(m.data()[i]);
    }
    auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
    worst = std::max(worst, rel(hybrid_norm(m, 1.0), fro));
    worst = std::max(worst, rel(hybrid_norm(m, 0.0), l11));
    for (double a : {0.2, 0.5, 0.8}) worst = std::max(worst, rel(hybrid_norm(m, a), a * fro + (1 - a) * l11));
  }
  const double secs = seconds_since(start);
  return {worst <= kNormRelTol && secs < kNormSeconds, fmt("worst relative error %.2e, %.3f s", worst, secs)};
}

// --- 2 ----------------------------------------------------------------------

Outcome coder_oracle() {
  const auto start = Clock::now();
  CounterRng rng(42);
  const double alphas[] = {0.5, 0.7, 1.0};
  const double gammas[] = {0.01, 0.1};
  CoderStop stop;
  stop.residual_threshold = 0.0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.below(7));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(11));
    RealMatrix d = random_matrix(rng, m, n);
    d.colwise().normalize();
    const RealVector y = random_matrix(rng, m, 1);
    const double alpha = alphas[t % 3];
    const double gamma = gammas[(t / 3) % 2];
    const HybridCode code = HybridCoder(d, alpha, gamma, stop).code(y);
    const double got = oracle::hybrid_cost(y, d, code.x, alpha, gamma);
    const double want = oracle::subgradient_min(y, d, alpha, gamma);
    worst = std::max(worst, std::abs(got - want));
  }
  const double secs = seconds_since(start);
  return {worst <= kOracleAbsTol && secs < kOracleSeconds,
          fmt("worst |coder - oracle| %.2e over 50 instances, %.1f s", worst, secs)};
}

// --- 3 ----------------------------------------------------------------------

Outcome omp_exactness() {
  CounterRng rng(3);
  int exact = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(16));
    const RealMatrix q = Eigen::HouseholderQR<RealMatrix>(random_matrix(rng, m, m)).householderQ();
    const auto k = std::min<std::size_t>(1 + rng.below(3), static_cast<std::size_t>(m));
    const auto support = sample_without_replacement(static_cast<std::size_t>(m), k, rng);
    RealVector x = RealVector::Zero(m);
    for (std::size_t j : support) x[static_cast<Eigen::Index>(j)] = (rng.uniform() < 0.5 ? -1 : 1) * (0.5 + rng.uniform());
    const OmpCode c = sparse_code_omp(q * x, q, 1e-12, static_cast<int>(m));
    std::vector<Eigen::Index> want(support.begin(), support.end()), got = c.support;
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    const double err = (c.x - x).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, err);
    if (got == want && err <= kOmpCoefTol) ++exact;
  }
  return {exact == 100, fmt("%.0f/100 exact, worst coefficient error %.2e", exact, worst)};
}

// --- 4, 5, 7 ----------------------------------------------------------------

struct LearnRun {
  LearnTrace trace;
  double cross_coherence = 0.0;
  double seconds = 0.0;
};

LearnRun learn_run(std::uint64_t seed, double eta) {
  SynthSpec spec;
  spec.m = 16;
  spec.labels = 3;
  spec.samples_per_label = 60;
  spec.seed = 100 + seed;
  const Dataset data = generate_synthetic(spec);
  LabeledTrainingSet train = data.by_label();
  for (auto& b : train.blocks) b = normalize_columns(b);
  LearnParams p;
  p.eta = eta;
  p.t_max = 20;
  p.objective_rel_tol = 0.0;
  p.seed = seed;
  const auto start = Clock::now();
  const LearnResult r = learn(train, {24, 24, 24}, p);
  return {r.trace, mean_cross_block_coherence(r.dictionary), seconds_since(start)};
}

struct LearnStudy {
  std::vector<LearnRun> with_penalty, without_penalty;
};

const LearnStudy& learn_study() {
  static const LearnStudy study = [] {
    LearnStudy s;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      s.with_penalty.push_back(learn_run(seed, 1.0));
      s.without_penalty.push_back(learn_run(seed, 0.0));
    }
    return s;
  }();
  return study;
}

double worst_increase(const LearnTrace& t) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < t.objective.size(); ++i) worst = std::max(worst, t.objective[i] - t.objective[i - 1]);
  return worst;
}

Outcome monotone_objective() {
  const LearnStudy& s = learn_study();
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity(), slowest = 0.0;
  for (const auto* runs : {&s.with_penalty, &s.without_penalty})
    for (const LearnRun& r : *runs) {
      const double w = worst_increase(r.trace);
      worst = std::max(worst, w);
      slowest = std::max(slowest, r.seconds);
      ok = ok && r.trace.size() == 20 && w <= kTraceSlack;
    }
  return {ok && slowest < kLearnSeconds,
          fmt("10 runs of 20 iterations, largest step change %.3e, slowest run %.1f s", worst, slowest)};
}

Outcome incoherence_reduction() {
  const LearnStudy& s = learn_study();
  int lower = 0;
  std::string detail;
  for (std::size_t i = 0; i < s.with_penalty.size(); ++i) {
    const double a = s.with_penalty[i].cross_coherence, b = s.without_penalty[i].cross_coherence;
    if (a < b) ++lower;
    detail += fmt("%.2f vs %.2f; ", a, b);
  }
  return {lower >= 4, fmt("lower in %.0f/5 seeds: ", lower) + detail};
}

// --- 6 ----------------------------------------------------------------------

struct RobustStudy {
  std::vector<double> dl_f, omp_f;
  double max_column_norm = 0.0;
  double seconds = 0.0;
  std::string error;
};

const RobustStudy& robust_study() {
  static const RobustStudy study = [] {
    RobustStudy s;
    const auto start = Clock::now();
    try {
      SynthSpec spec;
      spec.m = 32;
      spec.labels = 4;
      spec.atoms_per_label = 8;
      spec.samples_per_label = 1000;
      spec.outlier_fraction = 0.1;
      spec.outlier_magnitude = 5.0;
      spec.groups = 10;
      spec.seed = 7;
      const Dataset data = generate_synthetic(spec);

      Protocol protocol;
      protocol.replicates = 20;
      protocol.train_groups = 7;
      protocol.per_label_train = 400;
      protocol.per_label_test = 200;
      LearnParams learn;
      learn.alpha = 0.7;
      learn.t_max = 8;
      const MethodConfig dl = dl_roc_method(learn, 8);
      const MethodConfig omp = src_omp_method();
      for (int r = 0; r < protocol.replicates; ++r) {
        const ReplicatePlan plan = plan_replicate(data, protocol, 2024, r);
        LearnTrace trace;
        s.dl_f.push_back(run_method(dl, plan, &trace).macro.f);
        for (double n : trace.max_column_norm) s.max_column_norm = std::max(s.max_column_norm, n);
        s.omp_f.push_back(run_method(omp, plan).macro.f);
      }
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    s.seconds = seconds_since(start);
    return s;
  }();
  return study;
}

Outcome robustness_gap() {
  const RobustStudy& s = robust_study();
  if (!s.error.empty()) return {false, s.error};
  const MeanStd dl = mean_std(s.dl_f), omp = mean_std(s.omp_f);
  const double gap = dl.mean - omp.mean;
  return {gap >= kMinMacroFGap && s.seconds < kRobustSeconds,
          "DL-ROC " + format_mean_std(dl) + " vs SRC(OMP) " + format_mean_std(omp) +
              fmt(", gap %.4f, %.0f s", gap, s.seconds)};
}

// --- 7 ----------------------------------------------------------------------

Outcome unit_ball() {
  const LearnStudy& l = learn_study();
  const RobustStudy& r = robust_study();
  double worst = r.max_column_norm;
  std::size_t iterations = 0;
  for (const auto* runs : {&l.with_penalty, &l.without_penalty})
    for (const LearnRun& run : *runs) {
      iterations += run.trace.size();
      for (double n : run.trace.max_column_norm) worst = std::max(worst, n);
    }
  return {r.error.empty() && iterations > 0 && worst <= 1.0 + kUnitBallSlack,
          fmt("largest column norm %.15f over all recorded iterations", worst)};
}

// --- 8 ----------------------------------------------------------------------

Outcome latency() {
  SynthSpec spec;
  spec.m = 32;
  spec.labels = 4;
  spec.samples_per_label = 200;
  spec.seed = 8;
  const Dataset data = generate_synthetic(spec);
  auto [train_all, test] = split_by_group(data, draw_groups(data, 7, 8));
  const Dataset train = subsample_per_label(train_all, 128, 8);
  FitOptions opt;
  opt.learn_dictionary = false;
  opt.coder.kind = CoderKind::Hybrid;
  opt.coder.stop.residual_threshold = 0.01;
  const ClassifierModel model = fit(train.by_label(), {128, 128, 128, 128}, opt);
  const TimingStats t = benchmark_timing(model, test, 10);
  return {model.dictionary().cols() == 512 && t.median < kLatencyBudget,
          fmt("L = %.0f, median %.2f ms, p95 %.2f ms", static_cast<double>(model.dictionary().cols()),
              1e3 * t.median, 1e3 * t.p95)};
}

// --- 9 ----------------------------------------------------------------------

std::string read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome determinism(const std::string& cli, const fs::path& workdir) {
  if (cli.empty()) return {false, "no --cli given"};
  const std::vector<std::string> outputs = {"data.csv", "model.bin", "eval.jsonl"};
  std::vector<std::vector<std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = workdir / ("run" + std::to_string(run));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string d = dir.string();
    const std::vector<std::string> cmds = {
        cli + " --seed 5 --out " + d + "/data.csv gen --m 16 --labels 3 --samples-per-label 100",
        cli + " --seed 5 --tmax 3 --lk 6 --out " + d + "/model.bin train --data " + d + "/data.csv",
        cli + " --seed 5 --tmax 2 --lk 6 --replicates 2 --out " + d + "/eval.jsonl eval --data " + d +
            "/data.csv --per-label-train 40 --per-label-test 20 > " + d + "/table.txt",
    };
    for (const auto& c : cmds)
      if (std::system(c.c_str()) != 0) return {false, "command failed: " + c};
    std::vector<std::string> bytes;
    for (const auto& o : outputs) bytes.push_back(read_bytes(dir / o));
    runs.push_back(std::move(bytes));
  }
  std::string detail;
  bool same = true;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const bool eq = !runs[0][i].empty() && runs[0][i] == runs[1][i];
    same = same && eq;
    detail += outputs[i] + (eq ? " identical (" : " DIFFERS (") + std::to_string(runs[0][i].size()) + " bytes); ";
  }
  return {same, detail};
}

// --- 10 ---------------------------------------------------------------------

Outcome energy_selection() {
  CounterRng rng(10);
  int matches = 0, ties = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + rng.below(6);
    std::vector<Eigen::Index> sizes(k);
    for (auto& s : sizes) s = 1 + static_cast<Eigen::Index>(rng.below(5));
    if (t % 4 == 0) sizes[k - 1] = sizes[0];
    Eigen::Index n = 0;
    for (auto s : sizes) n += s;
    RealVector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform() < 0.3 ? 0.0 : rng.normal();
    if (t % 4 == 0) {
      // the last block repeats the first one, so both carry the same energy
      x.tail(sizes[0]) = x.head(sizes[0]);
      x[0] = x[n - sizes[0]] = 5.0;
    }
    if (x.squaredNorm() == 0.0) x[0] = 1.0;

    std::vector<double> want;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += x[i] * x[i];
    Eigen::Index off = 0;
    for (auto s : sizes) {
      double e = 0.0;
      for (Eigen::Index i = off; i < off + s; ++i) e += x[i] * x[i];
      want.push_back(e / total);
      off += s;
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < want.size(); ++i)
      if (want[i] > want[best]) best = i;
    for (std::size_t i = best + 1; i < want.size(); ++i)
      if (want[i] == want[best]) {
        ++ties;
        break;
      }

    const auto got = energy_ratios(x, sizes);
    if (got == want && argmax_lowest(got) == best) ++matches;
  }
  return {matches == 1000, fmt("%.0f/1000 exact matches, %.0f tied maxima resolved to the lowest index", matches, ties)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path workdir = fs::temp_directory_path() / "dlroc_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") cli = argv[i + 1];
    else if (flag == "--workdir") workdir = argv[i + 1];
  }
  fs::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"norm identities", norm_identities},
      {"hybrid coder matches subgradient oracle", coder_oracle},
      {"OMP exact recovery on orthonormal dictionaries", omp_exactness},
      {"learning objective never increases", monotone_objective},
      {"incoherence penalty lowers cross-label coherence", incoherence_reduction},
      {"hybrid coder beats OMP under outliers", robustness_gap},
      {"dictionary columns stay in the unit ball", unit_ball},
      {"online latency budget", latency},
      {"CLI outputs are bit-identical across runs", [&] { return determinism(cli, workdir); }},
      {"energy ratio label selection", energy_selection},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
