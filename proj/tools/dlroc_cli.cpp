#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlroc/classifier.hpp"
#include "dlroc/dataset.hpp"
#include "dlroc/error.hpp"
#include "dlroc/eval.hpp"

namespace {

constexpr int kExitData = 2;
constexpr int kExitConfig = 3;

struct Common {
  std::uint64_t seed = 0;
  double alpha = 0.7;
  double gamma = 0.5;
  double eta = 1.0;
  int tmax = 10;
  int lk = 8;
  std::string coder = "hybrid";
  double residual_tol = 0.01;
  int replicates = 100;
  std::size_t train_groups = 7;
  std::string out;
};

dlroc::LearnParams learn_params(const Common& c) {
  dlroc::LearnParams p;
  p.alpha = c.alpha;
  p.gamma = c.gamma;
  p.eta = c.eta;
  p.t_max = c.tmax;
  p.seed = c.seed;
  return p;
}

dlroc::MethodConfig method_for(const std::string& name, const Common& c) {
  const dlroc::CoderKind kind = dlroc::parse_coder_kind(name);
  if (kind == dlroc::CoderKind::Omp) return dlroc::src_omp_method(c.residual_tol);
  return dlroc::dl_roc_method(learn_params(c), c.lk, c.residual_tol);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      dlroc::fail(dlroc::ErrorKind::BadParameter, "not a number list: " + text);
    }
  }
  if (out.empty()) dlroc::fail(dlroc::ErrorKind::BadParameter, "empty number list");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) dlroc::fail(dlroc::ErrorKind::IoError, "cannot write " + path);
  f << text;
  if (!f) dlroc::fail(dlroc::ErrorKind::IoError, "write failed: " + path);
}

std::string labels_csv(const std::vector<dlroc::ClassificationResult>& results, std::size_t num_labels) {
  std::string out = "index,label";
  for (std::size_t k = 1; k <= num_labels; ++k) out += ",ratio_" + std::to_string(k);
  out += ",residual\n";
  char buf[64];
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out += std::to_string(i) + ',' + std::to_string(r.label.value_or(0));
    for (std::size_t k = 0; k < num_labels; ++k) {
      const double v = k < r.energy_ratios.size() ? r.energy_ratios[k] : 0.0;
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", r.residual_norm);
    out += buf;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust dictionary-learning sparse representation classifier"};
  app.set_config("--config", "", "key = value file; command line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  Common c;
  app.add_option("--seed", c.seed, "Seed for every random draw");
  app.add_option("--alpha", c.alpha, "Weight of the squared term in the hybrid norm");
  app.add_option("--gamma", c.gamma, "Sparsity weight");
  app.add_option("--eta", c.eta, "Cross-label incoherence weight");
  app.add_option("--tmax", c.tmax, "Learning iterations");
  app.add_option("--lk", c.lk, "Atoms per label");
  app.add_option("--coder", c.coder, "hybrid or omp")->check(CLI::IsMember({"hybrid", "omp"}));
  app.add_option("--residual-tol", c.residual_tol, "Stop coding at this residual norm");
  app.add_option("--replicates", c.replicates, "Evaluation replicates");
  app.add_option("--train-groups", c.train_groups, "Groups drawn for training per replicate");
  app.add_option("--out", c.out, "Output path ('-' for stdout)");

  auto* gen = app.add_subcommand("gen", "Write a synthetic dataset");
  dlroc::SynthSpec spec;
  gen->add_option("--m", spec.m, "Channels");
  gen->add_option("--labels", spec.labels, "Number of labels");
  gen->add_option("--atoms-per-label", spec.atoms_per_label, "Generating basis size per label");
  gen->add_option("--samples-per-label", spec.samples_per_label, "Samples per label");
  gen->add_option("--sparsity", spec.sparsity, "Nonzeros per sample");
  gen->add_option("--sigma", spec.gaussian_sigma, "Gaussian noise std");
  gen->add_option("--outlier-fraction", spec.outlier_fraction, "Probability an entry is replaced");
  gen->add_option("--outlier-magnitude", spec.outlier_magnitude, "Replacement values are uniform in +-this");
  gen->add_option("--groups", spec.groups, "Number of groups");

  std::string data_path, model_path, trace_path;
  auto* train = app.add_subcommand("train", "Fit a model and serialize it");
  train->add_option("--data", data_path, "Training CSV")->required();
  train->add_option("--trace", trace_path, "Write the learning trace here");

  auto* classify = app.add_subcommand("classify", "Label every sample of a CSV");
  classify->add_option("--model", model_path, "Model file")->required();
  classify->add_option("--data", data_path, "Input CSV")->required();

  std::size_t per_label_train = 2500, per_label_test = 1000;
  std::string methods = "hybrid,omp";
  bool with_timing = false;
  auto* eval = app.add_subcommand("eval", "Replicated train/test protocol");
  eval->add_option("--data", data_path, "Dataset CSV")->required();
  eval->add_option("--per-label-train", per_label_train, "Training samples per label and replicate");
  eval->add_option("--per-label-test", per_label_test, "Test samples per label and replicate");
  eval->add_option("--methods", methods, "Comma separated coders to compare");
  eval->add_flag("--timing", with_timing, "Include timing in the records (not reproducible)");

  std::string alphas, gammas, etas;
  int folds = 5;
  auto* cv = app.add_subcommand("cv", "Group-aware grid search");
  cv->add_option("--data", data_path, "Training CSV")->required();
  cv->add_option("--alphas", alphas, "Comma separated alpha values");
  cv->add_option("--gammas", gammas, "Comma separated gamma values");
  cv->add_option("--etas", etas, "Comma separated eta values");
  cv->add_option("--folds", folds, "Number of folds");

  std::size_t warmup = 10;
  auto* bench = app.add_subcommand("bench", "Per-sample classification latency");
  bench->add_option("--model", model_path, "Model file")->required();
  bench->add_option("--data", data_path, "Test CSV")->required();
  bench->add_option("--warmup", warmup, "Calls discarded before timing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      spec.seed = c.seed;
      const dlroc::Dataset d = dlroc::generate_synthetic(spec);
      if (c.out.empty() || c.out == "-") dlroc::fail(dlroc::ErrorKind::BadParameter, "gen needs --out <file>");
      dlroc::save_csv(d, c.out);
    } else if (*train) {
      if (c.out.empty()) dlroc::fail(dlroc::ErrorKind::BadParameter, "train needs --out <model file>");
      const dlroc::Dataset d = dlroc::load_csv(data_path);
      const dlroc::MethodConfig method = method_for(c.coder, c);
      dlroc::FitOptions options = method.fit;
      const std::vector<Eigen::Index> sizes(static_cast<std::size_t>(d.num_labels()), c.lk);
      dlroc::LearnTrace trace;
      const dlroc::ClassifierModel model = dlroc::fit(d.by_label(), sizes, options, d.label_names, &trace);
      dlroc::save_model(model, c.out);
      if (!trace_path.empty()) write_text(trace_path, trace.to_text());
    } else if (*classify) {
      const dlroc::ClassifierModel model = dlroc::load_model(model_path);
      const dlroc::Dataset d = dlroc::load_csv(data_path);
      const auto results = dlroc::classify_batch(d.samples, model);
      for (std::size_t i = 0; i < results.size(); ++i)
        if (!results[i].error.empty()) std::cerr << "sample " << i << ": " << results[i].error << '\n';
      write_text(c.out, labels_csv(results, model.num_labels()));
    } else if (*eval) {
      const dlroc::Dataset d = dlroc::load_csv(data_path);
      dlroc::Protocol protocol;
      protocol.replicates = c.replicates;
      protocol.train_groups = c.train_groups;
      protocol.per_label_train = per_label_train;
      protocol.per_label_test = per_label_test;
      std::stringstream ss(methods);
      std::string name;
      while (std::getline(ss, name, ',')) protocol.methods.push_back(method_for(name, c));
      const dlroc::EvalReport report = dlroc::run_replicates(d, protocol, c.seed);
      std::cout << report.table();
      if (!c.out.empty()) write_text(c.out, report.records(with_timing));
    } else if (*cv) {
      const dlroc::Dataset d = dlroc::load_csv(data_path);
      const auto a = alphas.empty() ? std::vector<double>{c.alpha} : parse_list(alphas);
      const auto g = gammas.empty() ? std::vector<double>{c.gamma} : parse_list(gammas);
      const auto e = etas.empty() ? std::vector<double>{c.eta} : parse_list(etas);
      std::vector<dlroc::GridPoint> grid;
      for (double av : a)
        for (double gv : g)
          for (double ev : e) grid.push_back({av, gv, ev});
      const dlroc::CvResult res = dlroc::cross_validate(d, grid, folds, c.seed, method_for("hybrid", c));
      write_text(c.out, res.table());
    } else if (*bench) {
      const dlroc::ClassifierModel model = dlroc::load_model(model_path);
      const dlroc::Dataset d = dlroc::load_csv(data_path);
      const dlroc::TimingStats t = dlroc::benchmark_timing(model, d, warmup);
      char buf[160];
      std::snprintf(buf, sizeof buf, "samples %zu mean %.6e median %.6e p95 %.6e seconds\n", t.samples, t.mean, t.median,
                    t.p95);
      write_text(c.out, buf);
    }
  } catch (const dlroc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dlroc::is_config_error(e.kind()) ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
