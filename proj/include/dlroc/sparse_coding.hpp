#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dlroc/norms.hpp"

namespace dlroc {

/// Stopping rules for the hybrid coder. The coder ends as soon as the l2
/// residual reaches residual_threshold; otherwise coordinate sweeps run until
/// the relative objective decrease of a sweep falls under objective_rel_tol or
/// max_sweeps is hit, after which an ADMM refinement (bounded by
/// refine_max_iter / refine_tol) and a final coordinate polish are applied.
struct CoderStop {
  double residual_threshold = 0.01;
  int max_sweeps = 200;
  double objective_rel_tol = 1e-6;
  int refine_max_iter = 5000;
  double refine_tol = 1e-7;

  void validate() const;
};

enum class CoderExit { Residual, Stalled, SweepLimit };

/// argmin_s alpha*||r - s a||_2^2 + (1-alpha)*||r - s a||_1 + gamma*|s|, exact.
double solve_scalar_subproblem(const Eigen::Ref<const RealVector>& residual,
                               const Eigen::Ref<const RealVector>& atom, double alpha, double gamma);

/// alpha*||y - Dx||_2^2 + (1-alpha)*||y - Dx||_1 + gamma*||x||_1.
double hybrid_objective(const Eigen::Ref<const RealVector>& y, const Eigen::Ref<const RealMatrix>& dict,
                        const Eigen::Ref<const RealVector>& x, double alpha, double gamma);

struct HybridCode {
  RealVector x;
  double objective = 0.0;
  double residual_norm = 0.0;
  int sweeps = 0;
  int refine_iterations = 0;
  CoderExit exit = CoderExit::Stalled;
  /// Objective at the start and after every accepted update stage. Non-increasing.
  std::vector<double> trace;
};

/// Hybrid-norm sparse coder bound to one dictionary. Construction validates the
/// dictionary and, for small dictionaries, factors I + D^T D once; code() is const and thread-safe.
class HybridCoder {
 public:
  HybridCoder(RealMatrix dictionary, double alpha, double gamma, CoderStop stop = {});

  HybridCode code(const Eigen::Ref<const RealVector>& y) const;
  HybridCode code(const Eigen::Ref<const RealVector>& y, const Eigen::Ref<const RealVector>& warm_start) const;

  const RealMatrix& dictionary() const { return dict_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  const CoderStop& stop() const { return stop_; }

 private:
  struct Workspace;

  double sweep(Workspace& ws) const;
  void run_sweeps(Workspace& ws, HybridCode& out, int budget) const;
  RealVector refine(const Eigen::Ref<const RealVector>& y, const RealVector& start, int& iterations) const;

  static constexpr Eigen::Index kFullRefineAtoms = 64;  // larger: refine on the support only
  static constexpr int kRestrictedRefineRounds = 3;

  RealMatrix dict_;
  RealVector col_sq_norms_;
  RealMatrix abs_dict_;
  double alpha_;
  double gamma_;
  CoderStop stop_;
  bool wide_ = false;              // more atoms than rows: factor I + D D^T instead
  Eigen::LLT<RealMatrix> factor_;  // only for dictionaries refined in full
};

RealVector sparse_code_hybrid(const Eigen::Ref<const RealVector>& y, const Eigen::Ref<const RealMatrix>& dict,
                              double alpha, double gamma, const CoderStop& stop = {});

struct OmpCode {
  RealVector x;
  std::vector<Eigen::Index> support;  // in selection order
  double residual_norm = 0.0;
  std::vector<double> residual_history;  // after each accepted atom, starting with ||y||
  int skipped_atoms = 0;                 // atoms rejected as linearly dependent on the active set
};

/// Orthogonal matching pursuit on unit-norm atoms. Dependent atoms are skipped
/// rather than reported as an error.
OmpCode sparse_code_omp(const Eigen::Ref<const RealVector>& y, const Eigen::Ref<const RealMatrix>& dict,
                        double residual_tol, int max_atoms);

}  // namespace dlroc
