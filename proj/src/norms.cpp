#include "dlroc/norms.hpp"

#include <cmath>
#include <string>

#include "dlroc/error.hpp"

namespace dlroc {

void require_finite(const Eigen::Ref<const RealMatrix>& m, const char* what) {
  if (!m.allFinite()) fail(ErrorKind::NonFiniteInput, std::string(what) + " contains NaN or Inf");
}

double lpq_norm(const Eigen::Ref<const RealMatrix>& m, double p, double q) {
  if (!(p >= 1.0) || !(q >= 1.0)) fail(ErrorKind::BadExponent, "p and q must be >= 1");
  require_finite(m, "matrix");
  double outer = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double inner = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) inner += std::pow(std::abs(m(i, j)), p);
    outer += std::pow(inner, q / p);
  }
  return std::pow(outer, 1.0 / q);
}

double hybrid_norm(const Eigen::Ref<const RealMatrix>& m, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::AlphaOutOfRange, "alpha must lie in [0, 1]");
  require_finite(m, "matrix");
  return hybrid_norm_unchecked(m, alpha);
}

RealMatrix gram(const Eigen::Ref<const RealMatrix>& m) {
  require_finite(m, "matrix");
  RealMatrix g = m.transpose() * m;
  // symmetrize so G_ij and G_ji are bit-identical
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = j + 1; i < g.rows(); ++i) g(j, i) = g(i, j);
  return g;
}

double mutual_coherence(const Eigen::Ref<const RealMatrix>& m) {
  if (m.cols() < 2) fail(ErrorKind::TooFewColumns, "mutual coherence needs at least 2 columns");
  const RealMatrix g = gram(m);
  double best = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = j + 1; i < g.rows(); ++i) best = std::max(best, std::abs(g(i, j)));
  return best;
}

double avg_mutual_coherence(const Eigen::Ref<const RealMatrix>& m) {
  if (m.cols() < 2) fail(ErrorKind::TooFewColumns, "average mutual coherence needs at least 2 columns");
  const RealMatrix g = gram(m);
  const double n = static_cast<double>(g.cols());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = j + 1; i < g.rows(); ++i) sum += std::abs(g(i, j));
  return sum / (n * (n - 1.0) / 2.0);
}

double cross_block_coherence(const Eigen::Ref<const RealMatrix>& dk, const Eigen::Ref<const RealMatrix>& dj) {
  if (dk.rows() != dj.rows())
    fail(ErrorKind::DimensionMismatch, "blocks have " + std::to_string(dk.rows()) + " and " +
                                           std::to_string(dj.rows()) + " rows");
  require_finite(dk, "block");
  require_finite(dj, "block");
  return (dk.transpose() * dj).squaredNorm();
}

}  // namespace dlroc
