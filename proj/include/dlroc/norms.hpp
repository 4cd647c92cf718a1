#pragma once

#include <Eigen/Dense>

namespace dlroc {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Throws NonFiniteInput if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const RealMatrix>& m, const char* what);

/// (sum_i (sum_j |z_ij|^p)^(q/p))^(1/q), rows outer, columns inner. p, q >= 1.
double lpq_norm(const Eigen::Ref<const RealMatrix>& m, double p, double q);

/// alpha * ||M||_F^2 + (1 - alpha) * ||M||_{1,1}. The Frobenius term is squared.
double hybrid_norm(const Eigen::Ref<const RealMatrix>& m, double alpha);

/// Same as hybrid_norm without input validation; used in inner loops.
inline double hybrid_norm_unchecked(const Eigen::Ref<const RealMatrix>& m, double alpha) {
  return alpha * m.squaredNorm() + (1.0 - alpha) * m.cwiseAbs().sum();
}

/// G = M^T M.
RealMatrix gram(const Eigen::Ref<const RealMatrix>& m);

/// Largest off-diagonal |G_ij|. Columns are used as given, not normalized.
double mutual_coherence(const Eigen::Ref<const RealMatrix>& m);

/// Mean of |G_ij| over unordered pairs i < j.
double avg_mutual_coherence(const Eigen::Ref<const RealMatrix>& m);

/// ||Dk^T Dj||_F^2.
double cross_block_coherence(const Eigen::Ref<const RealMatrix>& dk, const Eigen::Ref<const RealMatrix>& dj);

}  // namespace dlroc
