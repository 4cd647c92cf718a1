#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dlroc/dictionary.hpp"

namespace dlroc {

/// Column-major samples (m x N) with 1-based labels and group ids.
struct Dataset {
  RealMatrix samples;
  std::vector<int> labels;
  std::vector<int> groups;
  std::vector<std::string> label_names;  // index k-1 names label k

  Eigen::Index channels() const { return samples.rows(); }
  std::size_t size() const { return labels.size(); }
  int num_labels() const { return static_cast<int>(label_names.size()); }

  void validate() const;
  /// Present group ids, ascending.
  std::vector<int> group_ids() const;
  std::vector<std::size_t> indices_of_label(int label) const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
  /// Raw per-label training matrices in label order.
  LabeledTrainingSet by_label() const;

  bool operator==(const Dataset& other) const;
};

struct SynthSpec {
  int m = 32;
  int labels = 4;
  int atoms_per_label = 8;
  int samples_per_label = 600;
  int sparsity = 3;
  double gaussian_sigma = 0.01;
  double outlier_fraction = 0.1;
  double outlier_magnitude = 5.0;
  int groups = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  Dataset data;
  std::vector<RealMatrix> bases;  // generating basis per label, unit columns
  std::size_t outlier_entries = 0;
};

/// Draw order (single CounterRng(seed) stream): every basis entry (label-major,
/// column-major, normal), then per sample in label-major order: the support
/// (sample_without_replacement), per support slot a magnitude uniform[0.5, 1.5]
/// and a sign (uniform < 0.5 is negative), then m Gaussian noise draws; finally
/// one uniform per matrix entry (column-major) decides contamination and, when
/// it fires, one more uniform picks the replacement value.
SyntheticData generate_synthetic_detailed(const SynthSpec& spec);
Dataset generate_synthetic(const SynthSpec& spec);

/// Partition by group membership: samples whose group is in train_groups go left.
std::pair<Dataset, Dataset> split_by_group(const Dataset& data, const std::set<int>& train_groups);

/// `count` present groups drawn without replacement.
std::set<int> draw_groups(const Dataset& data, std::size_t count, std::uint64_t seed);

/// Uniform without-replacement sampling of per_label samples from each label
/// (label k uses stream derive_seed(seed, {k})), output in label order.
Dataset subsample_per_label(const Dataset& data, std::size_t per_label, std::uint64_t seed);

/// CSV with header `group,label,c1..cm`; a `.gz` suffix selects gzip.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

}  // namespace dlroc
