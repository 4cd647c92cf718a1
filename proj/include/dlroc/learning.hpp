#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dlroc/dictionary.hpp"
#include "dlroc/sparse_coding.hpp"

namespace dlroc {

struct RandomSearchParams {
  int candidates_per_round = 50;
  int rounds = 40;
  double initial_sigma = 0.1;
  double sigma_decay = 0.5;
  double min_sigma = 1e-4;

  void validate() const;
};

/// Controls for the alternating dictionary learner. alpha/gamma/eta have no
/// canonical values; the defaults here are repository conventions.
struct LearnParams {
  double alpha = 0.7;
  double gamma = 0.5;
  double eta = 1.0;
  int t_max = 10;
  RandomSearchParams rs;
  std::uint64_t seed = 0;
  double objective_rel_tol = 1e-4;
  CoderStop coder;

  void validate() const;
};

struct LearnTrace {
  std::vector<double> objective;
  std::vector<double> avg_cross_coherence;
  std::vector<double> seconds;
  std::vector<double> max_column_norm;

  std::size_t size() const { return objective.size(); }
  /// One line per iteration: "<t> <objective> <avg cross coherence> <seconds>".
  std::string to_text() const;
};

struct LearnResult {
  Dictionary dictionary;
  SparseMatrix codes;
  LearnTrace trace;
};

/// D_k^0: L_k columns of Psi_k drawn without replacement (stream derive_seed(seed, {k})),
/// then rescaled to unit norm.
Dictionary init_dictionary(const LabeledTrainingSet& train, const std::vector<Eigen::Index>& sizes,
                           std::uint64_t seed);

/// Step 1. Each column of Psi_k is coded against D_k alone. When `previous` is
/// given the coder is warm-started from the matching previous code, so no
/// column's objective can increase.
SparseMatrix update_codes(const LabeledTrainingSet& train, const Dictionary& dict, const LearnParams& params,
                          const SparseMatrix* previous = nullptr);

/// Psi_k - sum_{j<l} new_j x_j^row - sum_{j>l} old_j x_j^row  (l is 0-based).
RealMatrix column_residual(const Eigen::Ref<const RealMatrix>& psi_k, const Eigen::Ref<const RealMatrix>& dk_new,
                           const Eigen::Ref<const RealMatrix>& dk_old, const Eigen::Ref<const RealMatrix>& xk,
                           Eigen::Index l);

/// alpha*||R - d x||_F^2 + (1-alpha)*||R - d x||_{1,1} + eta * sum_j ||d^T D_j||_2^2.
double column_objective(const Eigen::Ref<const RealVector>& d, const Eigen::Ref<const RealMatrix>& residual,
                        const Eigen::Ref<const RealVector>& x_row, const std::vector<RealMatrix>& other_blocks,
                        double alpha, double eta);

/// Same value as column_objective, precomputed for repeated evaluation: columns
/// where x_row is zero collapse to a constant and the cross-block term becomes
/// d^T C d with C = sum_j D_j D_j^T.
class ColumnObjective {
 public:
  ColumnObjective(const Eigen::Ref<const RealMatrix>& residual, const Eigen::Ref<const RealVector>& x_row,
                  RealMatrix cross_gram, double alpha, double eta);

  double operator()(const RealVector& d) const { return reconstruction(d) + eta_ * incoherence(d); }
  double reconstruction(const RealVector& d) const;
  double incoherence(const RealVector& d) const { return d.dot(cross_gram_ * d); }

 private:
  RealMatrix active_residual_;
  RealVector active_x_;
  RealMatrix cross_gram_;
  double constant_ = 0.0;
  double alpha_;
  double eta_;
};

struct SearchResult {
  RealVector point;
  double value = 0.0;
  int accepted = 0;
  int evaluations = 0;
};

/// Improvement-only random search inside the unit l2 ball. Candidates are
/// best + sigma * u with u uniform on the unit sphere; points outside the ball
/// are projected onto it. sigma shrinks after every round without acceptance.
SearchResult random_search_min(const std::function<double(const RealVector&)>& objective,
                               const Eigen::Ref<const RealVector>& init, const RandomSearchParams& rs,
                               std::uint64_t seed);

/// Step 2: Gauss-Seidel sweep over blocks and columns. `iteration` only feeds
/// the per-column seed derive_seed(params.seed, {iteration, k, l}).
Dictionary update_dictionary(const LabeledTrainingSet& train, const Dictionary& prev, const SparseMatrix& codes,
                             const LearnParams& params, int iteration = 1);

/// Full joint objective; the eta sum runs over ordered pairs j != k.
double objective_value(const LabeledTrainingSet& train, const Dictionary& dict, const SparseMatrix& codes,
                       const LearnParams& params);

/// Mean ||D_k^T D_j||_F^2 over unordered label pairs (0 for one label).
double mean_cross_block_coherence(const Dictionary& dict);

LearnResult learn(const LabeledTrainingSet& train, const std::vector<Eigen::Index>& sizes, const LearnParams& params);

}  // namespace dlroc
