#include "dlroc/dictionary.hpp"

#include <numeric>
#include <string>

#include "dlroc/error.hpp"

namespace dlroc {

Dictionary::Dictionary(RealMatrix atoms, std::vector<Eigen::Index> block_sizes)
    : atoms_(std::move(atoms)), sizes_(std::move(block_sizes)) {
  if (sizes_.empty()) fail(ErrorKind::DimensionMismatch, "dictionary needs at least one block");
  Eigen::Index total = 0;
  for (Eigen::Index s : sizes_) {
    if (s < 1) fail(ErrorKind::DimensionMismatch, "every block needs at least one atom");
    offsets_.push_back(total);
    total += s;
  }
  if (total != atoms_.cols())
    fail(ErrorKind::DimensionMismatch, "block sizes sum to " + std::to_string(total) + " but dictionary has " +
                                           std::to_string(atoms_.cols()) + " columns");
  if (atoms_.rows() < 1) fail(ErrorKind::DimensionMismatch, "dictionary has no rows");
}

Dictionary Dictionary::from_blocks(const std::vector<RealMatrix>& blocks) {
  if (blocks.empty()) fail(ErrorKind::DimensionMismatch, "dictionary needs at least one block");
  const Eigen::Index m = blocks.front().rows();
  Eigen::Index total = 0;
  std::vector<Eigen::Index> sizes;
  for (const auto& b : blocks) {
    if (b.rows() != m) fail(ErrorKind::DimensionMismatch, "blocks differ in row count");
    sizes.push_back(b.cols());
    total += b.cols();
  }
  RealMatrix atoms(m, total);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    atoms.middleCols(off, b.cols()) = b;
    off += b.cols();
  }
  return Dictionary(std::move(atoms), std::move(sizes));
}

std::pair<std::size_t, Eigen::Index> Dictionary::locate(Eigen::Index column) const {
  if (column < 0 || column >= atoms_.cols()) fail(ErrorKind::IndexOutOfRange, "column " + std::to_string(column));
  std::size_t k = 0;
  while (k + 1 < offsets_.size() && offsets_[k + 1] <= column) ++k;
  return {k, column - offsets_[k]};
}

double Dictionary::max_column_norm() const {
  if (atoms_.cols() == 0) return 0.0;
  return atoms_.colwise().norm().maxCoeff();
}

void LabeledTrainingSet::validate() const {
  if (blocks.empty()) fail(ErrorKind::InsufficientData, "training set has no labels");
  const Eigen::Index m = blocks.front().rows();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].rows() != m) fail(ErrorKind::DimensionMismatch, "label blocks differ in row count");
    if (blocks[k].cols() < 1) fail(ErrorKind::InsufficientData, "label " + std::to_string(k + 1) + " has no samples");
    require_finite(blocks[k], "training block");
  }
}

bool SparseMatrix::operator==(const SparseMatrix& other) const {
  if (blocks.size() != other.blocks.size()) return false;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& a = blocks[k];
    const auto& b = other.blocks[k];
    if (a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
  }
  return true;
}

}  // namespace dlroc
