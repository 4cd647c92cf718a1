#include "dlroc/learning.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "dlroc/error.hpp"
#include "dlroc/rng.hpp"

namespace dlroc {

void RandomSearchParams::validate() const {
  if (candidates_per_round < 1) fail(ErrorKind::BadParameter, "candidates_per_round must be >= 1");
  if (rounds < 1) fail(ErrorKind::BadParameter, "rounds must be >= 1");
  if (!(initial_sigma > 0.0)) fail(ErrorKind::BadParameter, "initial_sigma must be > 0");
  if (!(sigma_decay > 0.0 && sigma_decay < 1.0)) fail(ErrorKind::BadParameter, "sigma_decay must lie in (0, 1)");
  if (!(min_sigma > 0.0)) fail(ErrorKind::BadParameter, "min_sigma must be > 0");
}

void LearnParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::AlphaOutOfRange, "alpha must lie in [0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail(ErrorKind::BadParameter, "gamma must be finite and >= 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail(ErrorKind::BadParameter, "eta must be finite and >= 0");
  if (t_max < 1) fail(ErrorKind::BadParameter, "t_max must be >= 1");
  if (!(objective_rel_tol >= 0.0)) fail(ErrorKind::BadParameter, "objective_rel_tol must be >= 0");
  rs.validate();
  coder.validate();
}

std::string LearnTrace::to_text() const {
  std::string out;
  char line[160];
  for (std::size_t t = 0; t < objective.size(); ++t) {
    std::snprintf(line, sizeof line, "%zu %.17g %.17g %.6f\n", t + 1, objective[t], avg_cross_coherence[t],
                  seconds[t]);
    out += line;
  }
  return out;
}

namespace {

void check_shapes(const LabeledTrainingSet& train, const Dictionary& dict) {
  if (dict.num_blocks() != train.num_labels())
    fail(ErrorKind::DimensionMismatch, "dictionary has " + std::to_string(dict.num_blocks()) + " blocks for " +
                                           std::to_string(train.num_labels()) + " labels");
  if (dict.rows() != train.rows()) fail(ErrorKind::DimensionMismatch, "dictionary and data differ in row count");
}

void check_shapes(const LabeledTrainingSet& train, const Dictionary& dict, const SparseMatrix& codes) {
  check_shapes(train, dict);
  if (codes.blocks.size() != train.num_labels()) fail(ErrorKind::DimensionMismatch, "code block count mismatch");
  for (std::size_t k = 0; k < codes.blocks.size(); ++k) {
    if (codes.blocks[k].rows() != dict.block_size(k) || codes.blocks[k].cols() != train.blocks[k].cols())
      fail(ErrorKind::DimensionMismatch, "code block " + std::to_string(k) + " does not conform");
  }
}

RealMatrix cross_gram_excluding(const Dictionary& dict, std::size_t k) {
  RealMatrix c = RealMatrix::Zero(dict.rows(), dict.rows());
  for (std::size_t j = 0; j < dict.num_blocks(); ++j) {
    if (j == k) continue;
    c.noalias() += dict.block(j) * dict.block(j).transpose();
  }
  return c;
}

}  // namespace

Dictionary init_dictionary(const LabeledTrainingSet& train, const std::vector<Eigen::Index>& sizes,
                           std::uint64_t seed) {
  train.validate();
  if (sizes.size() != train.num_labels()) fail(ErrorKind::DimensionMismatch, "one size per label required");
  std::vector<RealMatrix> blocks;
  for (std::size_t k = 0; k < train.num_labels(); ++k) {
    const RealMatrix& psi = train.blocks[k];
    if (sizes[k] < 1) fail(ErrorKind::BadParameter, "sub-dictionary sizes must be >= 1");
    if (sizes[k] > psi.cols())
      fail(ErrorKind::InsufficientData, "label " + std::to_string(k + 1) + " has " + std::to_string(psi.cols()) +
                                            " samples, " + std::to_string(sizes[k]) + " atoms requested");
    CounterRng rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    const auto picks =
        sample_without_replacement(static_cast<std::size_t>(psi.cols()), static_cast<std::size_t>(sizes[k]), rng);
    RealMatrix block(psi.rows(), sizes[k]);
    for (std::size_t i = 0; i < picks.size(); ++i) {
      const auto col = psi.col(static_cast<Eigen::Index>(picks[i]));
      const double n = col.norm();
      if (n == 0.0) fail(ErrorKind::ZeroColumn, "sampled column " + std::to_string(picks[i]) + " of label " +
                                                    std::to_string(k + 1) + " is zero");
      block.col(static_cast<Eigen::Index>(i)) = col / n;
    }
    blocks.push_back(std::move(block));
  }
  return Dictionary::from_blocks(blocks);
}

SparseMatrix update_codes(const LabeledTrainingSet& train, const Dictionary& dict, const LearnParams& params,
                          const SparseMatrix* previous) {
  check_shapes(train, dict);
  if (previous) check_shapes(train, dict, *previous);
  SparseMatrix out;
  out.blocks.reserve(train.num_labels());
  for (std::size_t k = 0; k < train.num_labels(); ++k) {
    const HybridCoder coder(dict.block(k), params.alpha, params.gamma, params.coder);
    const RealMatrix& psi = train.blocks[k];
    RealMatrix xk(dict.block_size(k), psi.cols());
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
      xk.col(j) = previous ? coder.code(psi.col(j), previous->blocks[k].col(j)).x : coder.code(psi.col(j)).x;
    }
    out.blocks.push_back(std::move(xk));
  }
  return out;
}

RealMatrix column_residual(const Eigen::Ref<const RealMatrix>& psi_k, const Eigen::Ref<const RealMatrix>& dk_new,
                           const Eigen::Ref<const RealMatrix>& dk_old, const Eigen::Ref<const RealMatrix>& xk,
                           Eigen::Index l) {
  const Eigen::Index lk = dk_old.cols();
  if (l < 0 || l >= lk) fail(ErrorKind::IndexOutOfRange, "column index " + std::to_string(l));
  if (dk_new.cols() != lk || dk_new.rows() != psi_k.rows() || dk_old.rows() != psi_k.rows() || xk.rows() != lk ||
      xk.cols() != psi_k.cols())
    fail(ErrorKind::DimensionMismatch, "column_residual operands do not conform");
  RealMatrix r = psi_k;
  if (l > 0) r.noalias() -= dk_new.leftCols(l) * xk.topRows(l);
  const Eigen::Index tail = lk - l - 1;
  if (tail > 0) r.noalias() -= dk_old.rightCols(tail) * xk.bottomRows(tail);
  return r;
}

double column_objective(const Eigen::Ref<const RealVector>& d, const Eigen::Ref<const RealMatrix>& residual,
                        const Eigen::Ref<const RealVector>& x_row, const std::vector<RealMatrix>& other_blocks,
                        double alpha, double eta) {
  if (d.size() != residual.rows() || x_row.size() != residual.cols())
    fail(ErrorKind::DimensionMismatch, "column objective operands do not conform");
  const RealMatrix e = residual - d * x_row.transpose();
  double value = alpha * e.squaredNorm() + (1.0 - alpha) * e.cwiseAbs().sum();
  for (const auto& block : other_blocks) {
    if (block.rows() != d.size()) fail(ErrorKind::DimensionMismatch, "other block row count differs");
    value += eta * (d.transpose() * block).squaredNorm();
  }
  return value;
}

ColumnObjective::ColumnObjective(const Eigen::Ref<const RealMatrix>& residual,
                                 const Eigen::Ref<const RealVector>& x_row, RealMatrix cross_gram, double alpha,
                                 double eta)
    : cross_gram_(std::move(cross_gram)), alpha_(alpha), eta_(eta) {
  if (x_row.size() != residual.cols()) fail(ErrorKind::DimensionMismatch, "x_row length differs from residual");
  if (cross_gram_.rows() != residual.rows() || cross_gram_.cols() != residual.rows())
    fail(ErrorKind::DimensionMismatch, "cross gram must be m x m");
  Eigen::Index active = 0;
  for (Eigen::Index j = 0; j < x_row.size(); ++j) active += x_row[j] != 0.0;
  active_residual_.resize(residual.rows(), active);
  active_x_.resize(active);
  Eigen::Index a = 0;
  for (Eigen::Index j = 0; j < x_row.size(); ++j) {
    if (x_row[j] != 0.0) {
      active_residual_.col(a) = residual.col(j);
      active_x_[a] = x_row[j];
      ++a;
    } else {
      constant_ += hybrid_norm_unchecked(residual.col(j), alpha);
    }
  }
}

double ColumnObjective::reconstruction(const RealVector& d) const {
  const Eigen::Index m = active_residual_.rows();
  const double* rdata = active_residual_.data();
  const double* dd = d.data();
  double sq = 0.0;
  double ab = 0.0;
  for (Eigen::Index j = 0; j < active_x_.size(); ++j) {
    const double xj = active_x_[j];
    const double* rc = rdata + j * m;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double e = rc[i] - dd[i] * xj;
      sq += e * e;
      ab += std::abs(e);
    }
  }
  return constant_ + alpha_ * sq + (1.0 - alpha_) * ab;
}

SearchResult random_search_min(const std::function<double(const RealVector&)>& objective,
                               const Eigen::Ref<const RealVector>& init, const RandomSearchParams& rs,
                               std::uint64_t seed) {
  rs.validate();
  if (init.size() < 1) fail(ErrorKind::DimensionMismatch, "empty search point");
  if (!(init.norm() <= 1.0 + 1e-9)) fail(ErrorKind::BadParameter, "initial point lies outside the unit ball");

  auto eval = [&](const RealVector& p, SearchResult& res) {
    const double v = objective(p);
    ++res.evaluations;
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteObjective, "objective returned NaN or Inf");
    return v;
  };

  SearchResult res;
  res.point = init;
  res.value = eval(res.point, res);

  CounterRng rng(seed);
  const Eigen::Index m = init.size();
  RealVector dir(m);
  RealVector cand(m);
  RealVector round_best(m);
  double sigma = rs.initial_sigma;
  for (int round = 0; round < rs.rounds && sigma >= rs.min_sigma; ++round) {
    double round_value = std::numeric_limits<double>::infinity();
    for (int c = 0; c < rs.candidates_per_round; ++c) {
      double len = 0.0;
      do {
        for (Eigen::Index i = 0; i < m; ++i) dir[i] = rng.normal();
        len = dir.norm();
      } while (len == 0.0);
      cand = res.point + (sigma / len) * dir;
      const double cn = cand.norm();
      if (cn > 1.0) cand /= cn;
      const double v = eval(cand, res);
      if (v < round_value) {
        round_value = v;
        round_best = cand;
      }
    }
    if (round_value < res.value) {
      res.value = round_value;
      res.point = round_best;
      ++res.accepted;
    } else {
      sigma *= rs.sigma_decay;
    }
  }
  return res;
}

Dictionary update_dictionary(const LabeledTrainingSet& train, const Dictionary& prev, const SparseMatrix& codes,
                             const LearnParams& params, int iteration) {
  params.validate();
  check_shapes(train, prev, codes);
  Dictionary dict = prev;
  for (std::size_t k = 0; k < train.num_labels(); ++k) {
    // blocks j < k already hold iteration t, blocks j > k still hold t-1
    const RealMatrix cross = cross_gram_excluding(dict, k);
    const RealMatrix& xk = codes.blocks[k];
    RealMatrix err = train.blocks[k] - dict.block(k) * xk;
    for (Eigen::Index l = 0; l < dict.block_size(k); ++l) {
      const RealVector x_row = xk.row(l).transpose();
      RealVector current = dict.block(k).col(l);
      err.noalias() += current * x_row.transpose();  // residual without atom l

      const ColumnObjective problem(err, x_row, cross, params.alpha, params.eta);
      const std::uint64_t sub_seed = derive_seed(
          params.seed, {static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(k),
                        static_cast<std::uint64_t>(l)});
      const SearchResult found =
          random_search_min([&problem](const RealVector& d) { return problem(d); }, current, params.rs, sub_seed);

      if (found.accepted > 0) {
        // The column problem weighs each cross-block pair once while the joint
        // objective counts it from both sides; only keep moves that lower both.
        const double d_recon = problem.reconstruction(found.point) - problem.reconstruction(current);
        const double d_incoh = problem.incoherence(found.point) - problem.incoherence(current);
        const double joint_delta = d_recon + 2.0 * params.eta * d_incoh;
        const double margin = 1e-12 * (1.0 + std::abs(problem(current)));
        if (joint_delta < -margin) {
          current = found.point;
          dict.block(k).col(l) = current;
        }
      }
      err.noalias() -= current * x_row.transpose();
    }
  }
  return dict;
}

double objective_value(const LabeledTrainingSet& train, const Dictionary& dict, const SparseMatrix& codes,
                       const LearnParams& params) {
  check_shapes(train, dict, codes);
  double total = 0.0;
  double carry = 0.0;  // Neumaier compensation
  auto add = [&](double v) {
    const double t = total + v;
    carry += std::abs(total) >= std::abs(v) ? (total - t) + v : (v - t) + total;
    total = t;
  };
  for (std::size_t k = 0; k < train.num_labels(); ++k) {
    const RealMatrix e = train.blocks[k] - dict.block(k) * codes.blocks[k];
    add(params.alpha * e.squaredNorm());
    add((1.0 - params.alpha) * e.cwiseAbs().sum());
    add(params.gamma * codes.blocks[k].cwiseAbs().sum());
    for (std::size_t j = 0; j < dict.num_blocks(); ++j) {
      if (j == k) continue;
      add(params.eta * (dict.block(k).transpose() * dict.block(j)).squaredNorm());
    }
  }
  return total + carry;
}

double mean_cross_block_coherence(const Dictionary& dict) {
  const std::size_t k = dict.num_blocks();
  if (k < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      sum += cross_block_coherence(dict.block(a), dict.block(b));
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

LearnResult learn(const LabeledTrainingSet& train, const std::vector<Eigen::Index>& sizes, const LearnParams& params) {
  params.validate();
  train.validate();
  using clock = std::chrono::steady_clock;

  LearnResult out;
  out.dictionary = init_dictionary(train, sizes, params.seed);
  for (int t = 1; t <= params.t_max; ++t) {
    const auto start = clock::now();
    out.codes = update_codes(train, out.dictionary, params, t == 1 ? nullptr : &out.codes);
    out.dictionary = update_dictionary(train, out.dictionary, out.codes, params, t);
    const double obj = objective_value(train, out.dictionary, out.codes, params);
    const double secs = std::chrono::duration<double>(clock::now() - start).count();

    out.trace.objective.push_back(obj);
    out.trace.avg_cross_coherence.push_back(mean_cross_block_coherence(out.dictionary));
    out.trace.seconds.push_back(secs);
    out.trace.max_column_norm.push_back(out.dictionary.max_column_norm());

    if (t > 1) {
      const double before = out.trace.objective[out.trace.size() - 2];
      if (before - obj < params.objective_rel_tol * std::abs(before)) break;
    }
  }
  return out;
}

}  // namespace dlroc
