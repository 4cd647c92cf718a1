#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dlroc/dictionary.hpp"
#include "dlroc/learning.hpp"
#include "dlroc/sparse_coding.hpp"

namespace dlroc {

enum class CoderKind { Hybrid, Omp };

std::string to_string(CoderKind kind);
CoderKind parse_coder_kind(const std::string& text);

/// Phase II coder settings carried by a model.
struct CoderSettings {
  CoderKind kind = CoderKind::Hybrid;
  double alpha = 0.7;
  double gamma = 0.5;
  // Looser than the learning defaults: online coding trades the last digits
  // of the objective for latency.
  CoderStop stop{.residual_threshold = 0.01,
                 .max_sweeps = 200,
                 .objective_rel_tol = 1e-4,
                 .refine_max_iter = 100,
                 .refine_tol = 1e-7};
  int omp_max_atoms = 0;        // 0: up to the signal dimension
  bool normalize_input = true;  // scale y to unit norm before coding
};

/// Immutable after construction; safe to share across threads.
class ClassifierModel {
 public:
  ClassifierModel(Dictionary dict, CoderSettings settings, std::vector<std::string> label_names = {});

  const Dictionary& dictionary() const { return dict_; }
  const CoderSettings& settings() const { return settings_; }
  const std::vector<std::string>& label_names() const { return names_; }
  std::size_t num_labels() const { return dict_.num_blocks(); }
  Eigen::Index signal_dim() const { return dict_.rows(); }

  /// Code y against the concatenated dictionary with the model's coder.
  RealVector code(const Eigen::Ref<const RealVector>& y) const;

 private:
  Dictionary dict_;
  CoderSettings settings_;
  std::vector<std::string> names_;
  std::shared_ptr<const HybridCoder> hybrid_;
};

struct ClassificationResult {
  std::optional<int> label;  // 1-based; empty when the code is all zero
  RealVector code;
  std::vector<double> energy_ratios;
  double residual_norm = 0.0;
  double seconds = 0.0;
  std::string error;  // set by classify_batch when a column failed

  bool classified() const { return label.has_value(); }
};

/// Scale every column to unit l2 norm.
RealMatrix normalize_columns(const Eigen::Ref<const RealMatrix>& m);

/// ||x_k||^2 / ||x||^2 per dictionary block.
std::vector<double> energy_ratios(const Eigen::Ref<const RealVector>& x, const Dictionary& dict);
std::vector<double> energy_ratios(const Eigen::Ref<const RealVector>& x, const std::vector<Eigen::Index>& block_sizes);

/// Index (0-based) of the largest entry, lowest index on ties.
std::size_t argmax_lowest(const std::vector<double>& values);

struct FitOptions {
  CoderSettings coder;
  LearnParams learn;
  bool learn_dictionary = true;  // false: normalized raw training data is the dictionary
};

/// Normalize, learn (or take raw data) and assemble a model.
ClassifierModel fit(const LabeledTrainingSet& raw_train, const std::vector<Eigen::Index>& sizes,
                    const FitOptions& options, std::vector<std::string> label_names = {},
                    LearnTrace* trace = nullptr);

ClassificationResult classify(const Eigen::Ref<const RealVector>& y, const ClassifierModel& model);

/// Per-column classify; failures are recorded in the result instead of thrown.
std::vector<ClassificationResult> classify_batch(const Eigen::Ref<const RealMatrix>& ys, const ClassifierModel& model);

void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);
std::string serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(const std::string& bytes);

}  // namespace dlroc
