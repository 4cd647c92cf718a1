#include "dlroc/sparse_coding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "dlroc/error.hpp"

namespace dlroc {

namespace {

void check_alpha_gamma(double alpha, double gamma) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::AlphaOutOfRange, "alpha must lie in [0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail(ErrorKind::BadParameter, "gamma must be finite and >= 0");
}

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double residual_objective(const RealVector& r, const RealVector& x, double alpha, double gamma) {
  return alpha * r.squaredNorm() + (1.0 - alpha) * r.lpNorm<1>() + gamma * x.lpNorm<1>();
}

}  // namespace

void CoderStop::validate() const {
  if (!(residual_threshold >= 0.0)) fail(ErrorKind::BadParameter, "residual_threshold must be >= 0");
  if (max_sweeps < 1) fail(ErrorKind::BadParameter, "max_sweeps must be >= 1");
  if (!(objective_rel_tol >= 0.0)) fail(ErrorKind::BadParameter, "objective_rel_tol must be >= 0");
  if (refine_max_iter < 0) fail(ErrorKind::BadParameter, "refine_max_iter must be >= 0");
  if (!(refine_tol > 0.0)) fail(ErrorKind::BadParameter, "refine_tol must be > 0");
}

namespace {

struct Knot {
  double at;
  double weight;
};

// Root of the monotone slope
//   g(s) = 2 alpha (s aa - ar) + sum_i w_i sign(s - b_i)
// with breakpoints b_i = r_i / a_i, w_i = (1 - alpha)|a_i| and b = 0 with
// w = gamma. Breakpoints are bracketed by quickselect-style partitioning
// instead of a full sort.
double scalar_minimizer(const double* residual, const double* atom, Eigen::Index m, double aa, double ar,
                        double alpha, double gamma) {
  if (alpha == 1.0) return soft(ar, gamma / 2.0) / aa;

  thread_local std::vector<Knot> knots;
  knots.clear();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = atom[i];
    if (a == 0.0) continue;
    const double w = (1.0 - alpha) * std::abs(a);
    knots.push_back({residual[i] / a, w});
    total += w;
  }
  if (gamma > 0.0) {
    knots.push_back({0.0, gamma});
    total += gamma;
  }

  double below = 0.0;  // weight of knots known to lie below the live range
  double above = 0.0;  // weight of knots known to lie above it
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  auto first = knots.begin();
  auto last = knots.end();
  while (first != last) {
    const double pivot = (first + (last - first) / 2)->at;
    auto mid_lo = std::partition(first, last, [pivot](const Knot& k) { return k.at < pivot; });
    auto mid_hi = std::partition(mid_lo, last, [pivot](const Knot& k) { return !(pivot < k.at); });
    double w_less = 0.0, w_equal = 0.0;
    for (auto it = first; it != mid_lo; ++it) w_less += it->weight;
    for (auto it = mid_lo; it != mid_hi; ++it) w_equal += it->weight;
    const double left = below + w_less;
    const double slope_below = 2.0 * alpha * (pivot * aa - ar) + left - (total - left);
    const double slope_above = slope_below + 2.0 * w_equal;
    if (slope_below <= 0.0 && slope_above >= 0.0) return pivot;
    if (slope_below > 0.0) {
      above = total - left;
      upper = pivot;
      last = mid_lo;
    } else {
      below = left + w_equal;
      lower = pivot;
      first = mid_hi;
    }
  }
  // root lies strictly between two adjacent knots, where g is affine
  if (alpha == 0.0) return below - above > 0.0 ? lower : upper;
  const double s = (2.0 * alpha * ar - below + above) / (2.0 * alpha * aa);
  return std::clamp(s, lower, upper);
}

}  // namespace

double solve_scalar_subproblem(const Eigen::Ref<const RealVector>& residual,
                               const Eigen::Ref<const RealVector>& atom, double alpha, double gamma) {
  if (residual.size() != atom.size())
    fail(ErrorKind::DimensionMismatch, "residual and atom differ in length");
  check_alpha_gamma(alpha, gamma);
  const double aa = atom.squaredNorm();
  if (aa == 0.0) fail(ErrorKind::ZeroAtom, "atom is identically zero");
  const RealVector r = residual;
  const RealVector a = atom;
  return scalar_minimizer(r.data(), a.data(), a.size(), aa, a.dot(r), alpha, gamma);
}

double hybrid_objective(const Eigen::Ref<const RealVector>& y, const Eigen::Ref<const RealMatrix>& dict,
                        const Eigen::Ref<const RealVector>& x, double alpha, double gamma) {
  if (dict.rows() != y.size() || dict.cols() != x.size())
    fail(ErrorKind::DimensionMismatch, "y, D and x do not conform");
  const RealVector r = y - dict * x;
  return residual_objective(r, x, alpha, gamma);
}

// ---------------------------------------------------------------------------

namespace {

// Solves (I + D^T D) x = rhs from a factor of either I + D^T D or, when D is
// wide, I + D D^T via (I + D^T D)^-1 = I - D^T (I + D D^T)^-1 D.
struct ShiftedSystem {
  const RealMatrix& dict;
  bool wide;
  const Eigen::LLT<RealMatrix>& factor;

  RealVector solve(const RealVector& rhs) const {
    if (!wide) return factor.solve(rhs);
    const RealVector t = factor.solve(dict * rhs);
    return rhs - dict.transpose() * t;
  }
};

Eigen::LLT<RealMatrix> factor_shifted(const RealMatrix& dict, bool wide) {
  RealMatrix small = wide ? RealMatrix(dict * dict.transpose()) : RealMatrix(dict.transpose() * dict);
  small.diagonal().array() += 1.0;
  return Eigen::LLT<RealMatrix>(small);
}

// ADMM on  min h(r) + gamma ||z||_1  s.t.  D x + r = y,  x = z,
// h(r) = alpha ||r||^2 + (1 - alpha) ||r||_1. The x-step matrix I + D^T D
// does not depend on rho, so rho can be rebalanced freely.
RealVector admm(const ShiftedSystem& sys, const RealVector& y, const RealVector& start, double alpha, double gamma,
                const CoderStop& stop, int& iterations) {
  const RealMatrix& dict = sys.dict;
  const Eigen::Index n = dict.cols();
  double rho = 0.2;
  RealVector x = start;
  RealVector z = start;
  RealVector r = y - dict * start;
  RealVector u = RealVector::Zero(y.size());
  RealVector v = RealVector::Zero(n);
  RealVector dx(y.size());
  const double tol = stop.refine_tol * (1.0 + y.norm());

  for (int it = 0; it < stop.refine_max_iter; ++it) {
    ++iterations;
    x = sys.solve(dict.transpose() * (y - r - u) + (z - v));
    dx.noalias() = dict * x;

    const double r_shrink = (1.0 - alpha) / rho;
    const double r_scale = 1.0 / (1.0 + 2.0 * alpha / rho);
    double dual_sq = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double next = soft(y[i] - dx[i] - u[i], r_shrink) * r_scale;
      dual_sq += (next - r[i]) * (next - r[i]);
      r[i] = next;
    }
    const double z_shrink = gamma / rho;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double next = soft(x[j] + v[j], z_shrink);
      dual_sq += (next - z[j]) * (next - z[j]);
      z[j] = next;
    }
    double primal_sq = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double gap = dx[i] + r[i] - y[i];
      u[i] += gap;
      primal_sq += gap * gap;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double gap = x[j] - z[j];
      v[j] += gap;
      primal_sq += gap * gap;
    }
    const double primal = std::sqrt(primal_sq);
    const double dual = rho * std::sqrt(dual_sq);
    if (primal <= tol && dual <= tol) break;
    // residual balancing only early on; a frozen rho keeps the usual convergence guarantee
    if (it < 300 && it % 10 == 9) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u /= 2.0;
        v /= 2.0;
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u *= 2.0;
        v *= 2.0;
      }
    }
  }
  const double fz = hybrid_objective(y, dict, z, alpha, gamma);
  const double fx = hybrid_objective(y, dict, x, alpha, gamma);
  return fz <= fx ? z : x;
}

}  // namespace

struct HybridCoder::Workspace {
  RealVector y;
  RealVector x;
  RealVector r;
  double objective = 0.0;
};

HybridCoder::HybridCoder(RealMatrix dictionary, double alpha, double gamma, CoderStop stop)
    : dict_(std::move(dictionary)), alpha_(alpha), gamma_(gamma), stop_(stop) {
  check_alpha_gamma(alpha_, gamma_);
  stop_.validate();
  if (dict_.rows() < 1 || dict_.cols() < 1) fail(ErrorKind::DimensionMismatch, "empty dictionary");
  require_finite(dict_, "dictionary");
  col_sq_norms_ = dict_.colwise().squaredNorm().transpose();
  abs_dict_ = dict_.cwiseAbs();
  for (Eigen::Index j = 0; j < dict_.cols(); ++j)
    if (col_sq_norms_[j] == 0.0) fail(ErrorKind::ZeroColumn, "dictionary column " + std::to_string(j) + " is zero");

  wide_ = dict_.cols() > dict_.rows();
  if (dict_.cols() <= kFullRefineAtoms) factor_ = factor_shifted(dict_, wide_);
}

double HybridCoder::sweep(Workspace& ws) const {
  const Eigen::Index n = dict_.cols();
  const Eigen::Index m = dict_.rows();
  RealVector& r = ws.r;
  RealVector sign = r.array().sign().matrix();
  RealVector at_zero = (r.array() == 0.0).cast<double>().matrix();
  bool any_zero = at_zero.any();
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto atom = dict_.col(j);
    const double old = ws.x[j];
    if (old == 0.0) {
      // zero stays optimal when 0 lies in the coordinate subgradient at s = 0
      const double centre = -2.0 * alpha_ * atom.dot(r) - (1.0 - alpha_) * atom.dot(sign);
      double slack = gamma_;
      if (any_zero) slack += (1.0 - alpha_) * abs_dict_.col(j).dot(at_zero);
      if (std::abs(centre) <= slack) continue;
    } else {
      r.noalias() += old * atom;
    }
    const double s = scalar_minimizer(r.data(), atom.data(), m, col_sq_norms_[j], atom.dot(r), alpha_, gamma_);
    if (s != 0.0) r.noalias() -= s * atom;
    ws.x[j] = s;
    if (s != 0.0 || old != 0.0) {
      sign = r.array().sign().matrix();
      at_zero = (r.array() == 0.0).cast<double>().matrix();
      any_zero = at_zero.any();
    }
  }
  r = ws.y - dict_ * ws.x;  // drop accumulated drift
  return residual_objective(r, ws.x, alpha_, gamma_);
}

void HybridCoder::run_sweeps(Workspace& ws, HybridCode& out, int budget) const {
  for (int s = 0; s < budget; ++s) {
    const RealVector prev_x = ws.x;
    const double prev = ws.objective;
    const double cur = sweep(ws);
    ++out.sweeps;
    if (cur > prev) {
      // rounding-level increase: keep the previous iterate
      ws.x = prev_x;
      ws.r = ws.y - dict_ * ws.x;
      out.exit = CoderExit::Stalled;
      return;
    }
    ws.objective = cur;
    out.trace.push_back(cur);
    if (ws.r.norm() <= stop_.residual_threshold) {
      out.exit = CoderExit::Residual;
      return;
    }
    if (prev - cur <= stop_.objective_rel_tol * std::max(std::abs(prev), 1e-300)) {
      out.exit = CoderExit::Stalled;
      return;
    }
  }
  out.exit = CoderExit::SweepLimit;
}


RealVector HybridCoder::refine(const Eigen::Ref<const RealVector>& y, const RealVector& start, int& iterations) const {
  const RealVector target = y;
  if (dict_.cols() <= kFullRefineAtoms)
    return admm(ShiftedSystem{dict_, wide_, factor_}, target, start, alpha_, gamma_, stop_, iterations);

  // Large dictionaries: refine on the current support only; the coordinate
  // polish that follows can still bring in new atoms.
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < start.size(); ++j)
    if (start[j] != 0.0) support.push_back(j);
  if (support.empty()) return start;
  const auto k = static_cast<Eigen::Index>(support.size());
  RealMatrix sub(dict_.rows(), k);
  RealVector sub_start(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    sub.col(i) = dict_.col(support[static_cast<std::size_t>(i)]);
    sub_start[i] = start[support[static_cast<std::size_t>(i)]];
  }
  const bool wide = k > sub.rows();
  const Eigen::LLT<RealMatrix> factor = factor_shifted(sub, wide);
  const RealVector sub_x = admm(ShiftedSystem{sub, wide, factor}, target, sub_start, alpha_, gamma_, stop_, iterations);
  RealVector out = RealVector::Zero(start.size());
  for (Eigen::Index i = 0; i < k; ++i) out[support[static_cast<std::size_t>(i)]] = sub_x[i];
  return out;
}

HybridCode HybridCoder::code(const Eigen::Ref<const RealVector>& y) const {
  return code(y, RealVector::Zero(dict_.cols()));
}

HybridCode HybridCoder::code(const Eigen::Ref<const RealVector>& y, const Eigen::Ref<const RealVector>& warm_start) const {
  if (y.size() != dict_.rows())
    fail(ErrorKind::DimensionMismatch,
         "signal has " + std::to_string(y.size()) + " entries, dictionary " + std::to_string(dict_.rows()) + " rows");
  if (warm_start.size() != dict_.cols()) fail(ErrorKind::DimensionMismatch, "warm start length differs from atom count");
  require_finite(y, "signal");
  require_finite(warm_start, "warm start");

  Workspace ws;
  ws.y = y;
  ws.x = warm_start;
  ws.r = ws.y - dict_ * ws.x;
  ws.objective = residual_objective(ws.r, ws.x, alpha_, gamma_);

  HybridCode out;
  out.trace.push_back(ws.objective);
  if (ws.r.norm() <= stop_.residual_threshold) {
    out.exit = CoderExit::Residual;
  } else {
    run_sweeps(ws, out, stop_.max_sweeps);
    // Support-restricted refinement may need a few rounds as the polish
    // changes the support; full refinement needs one.
    const int rounds = dict_.cols() <= kFullRefineAtoms ? 1 : kRestrictedRefineRounds;
    for (int round = 0; round < rounds && out.exit != CoderExit::Residual && stop_.refine_max_iter > 0; ++round) {
      const RealVector cand = refine(ws.y, ws.x, out.refine_iterations);
      const RealVector cand_r = ws.y - dict_ * cand;
      const double cand_obj = residual_objective(cand_r, cand, alpha_, gamma_);
      if (!(cand_obj < ws.objective)) break;
      const RealVector before = ws.x;
      ws.x = cand;
      ws.r = cand_r;
      ws.objective = cand_obj;
      out.trace.push_back(cand_obj);
      if (ws.r.norm() <= stop_.residual_threshold) {
        out.exit = CoderExit::Residual;
        break;
      }
      run_sweeps(ws, out, stop_.max_sweeps);
      if (((ws.x.array() != 0.0) == (before.array() != 0.0)).all()) break;
    }
  }
  out.x = std::move(ws.x);
  out.objective = ws.objective;
  out.residual_norm = ws.r.norm();
  return out;
}

RealVector sparse_code_hybrid(const Eigen::Ref<const RealVector>& y, const Eigen::Ref<const RealMatrix>& dict,
                              double alpha, double gamma, const CoderStop& stop) {
  if (dict.rows() != y.size()) fail(ErrorKind::DimensionMismatch, "signal length differs from dictionary rows");
  return HybridCoder(dict, alpha, gamma, stop).code(y).x;
}

// ---------------------------------------------------------------------------

OmpCode sparse_code_omp(const Eigen::Ref<const RealVector>& y, const Eigen::Ref<const RealMatrix>& dict,
                        double residual_tol, int max_atoms) {
  if (dict.rows() != y.size()) fail(ErrorKind::DimensionMismatch, "signal length differs from dictionary rows");
  if (max_atoms < 1) fail(ErrorKind::BadParameter, "max_atoms must be >= 1");
  if (!(residual_tol >= 0.0)) fail(ErrorKind::BadParameter, "residual_tol must be >= 0");
  require_finite(y, "signal");
  require_finite(dict, "dictionary");

  const Eigen::Index m = dict.rows();
  const Eigen::Index n = dict.cols();
  const Eigen::Index cap = std::min<Eigen::Index>({static_cast<Eigen::Index>(max_atoms), m, n});

  OmpCode out;
  out.x = RealVector::Zero(n);
  RealMatrix q(m, cap);   // orthonormal basis of the active atoms
  RealMatrix rr = RealMatrix::Zero(cap, cap);  // D_active = Q R
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  RealVector r = y;
  out.residual_history.push_back(r.norm());

  Eigen::Index k = 0;
  while (k < cap && r.norm() > residual_tol) {
    const RealVector corr = dict.transpose() * r;
    Eigen::Index pick = -1;
    double best = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (blocked[static_cast<std::size_t>(j)]) continue;
      const double c = std::abs(corr[j]);
      if (c > best) {
        best = c;
        pick = j;
      }
    }
    if (pick < 0 || best <= 1e-14 * r.norm()) break;

    RealVector w = dict.col(pick);
    const double atom_norm = w.norm();
    RealVector proj = RealVector::Zero(k);
    for (int pass = 0; pass < 2; ++pass) {
      const RealVector c = q.leftCols(k).transpose() * w;
      w.noalias() -= q.leftCols(k) * c;
      proj += c;
    }
    const double wn = w.norm();
    blocked[static_cast<std::size_t>(pick)] = 1;
    if (wn <= 1e-10 * std::max(atom_norm, 1.0)) {
      ++out.skipped_atoms;
      continue;
    }
    q.col(k) = w / wn;
    rr.col(k).head(k) = proj;
    rr(k, k) = wn;
    out.support.push_back(pick);
    ++k;
    const RealVector qty = q.leftCols(k).transpose() * y;
    r = y - q.leftCols(k) * qty;
    out.residual_history.push_back(r.norm());
  }

  if (k > 0) {
    const RealVector qty = q.leftCols(k).transpose() * y;
    const RealVector coef = rr.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(qty);
    for (Eigen::Index i = 0; i < k; ++i) out.x[out.support[static_cast<std::size_t>(i)]] = coef[i];
  }
  out.residual_norm = r.norm();
  return out;
}

}  // namespace dlroc
