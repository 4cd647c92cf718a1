#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dlroc/norms.hpp"

namespace dlroc {

/// Per-label sub-dictionaries stored side by side: D = [D_1 ... D_K].
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(RealMatrix atoms, std::vector<Eigen::Index> block_sizes);
  static Dictionary from_blocks(const std::vector<RealMatrix>& blocks);

  Eigen::Index rows() const { return atoms_.rows(); }
  Eigen::Index cols() const { return atoms_.cols(); }
  std::size_t num_blocks() const { return sizes_.size(); }
  Eigen::Index block_size(std::size_t k) const { return sizes_[k]; }
  Eigen::Index block_offset(std::size_t k) const { return offsets_[k]; }
  const std::vector<Eigen::Index>& block_sizes() const { return sizes_; }

  const RealMatrix& atoms() const { return atoms_; }
  auto block(std::size_t k) const { return atoms_.middleCols(offsets_[k], sizes_[k]); }
  auto block(std::size_t k) { return atoms_.middleCols(offsets_[k], sizes_[k]); }

  /// Global column index -> (block, local column).
  std::pair<std::size_t, Eigen::Index> locate(Eigen::Index column) const;

  double max_column_norm() const;

  bool operator==(const Dictionary& other) const {
    return sizes_ == other.sizes_ && atoms_.rows() == other.atoms_.rows() && atoms_.cols() == other.atoms_.cols() &&
           atoms_ == other.atoms_;
  }

 private:
  RealMatrix atoms_;
  std::vector<Eigen::Index> sizes_;
  std::vector<Eigen::Index> offsets_;
};

/// Per-label training matrices Psi_k (m x n_k), columns expected unit-norm.
struct LabeledTrainingSet {
  std::vector<RealMatrix> blocks;

  std::size_t num_labels() const { return blocks.size(); }
  Eigen::Index rows() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  void validate() const;
};

/// Per-label code matrices X_k (L_k x n_k).
struct SparseMatrix {
  std::vector<RealMatrix> blocks;

  bool operator==(const SparseMatrix& other) const;
};

}  // namespace dlroc
