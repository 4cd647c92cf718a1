#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "dlroc/error.hpp"
#include "dlroc/rng.hpp"
#include "dlroc/sparse_coding.hpp"
#include "support/oracles.hpp"

using namespace dlroc;

namespace {

RealMatrix random_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  RealMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

RealVector random_vector(CounterRng& rng, Eigen::Index n) {
  RealVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::BadParameter;
}

double scalar_cost(const RealVector& r, const RealVector& a, double s, double alpha, double gamma) {
  const RealVector e = r - s * a;
  return alpha * e.squaredNorm() + (1 - alpha) * e.lpNorm<1>() + gamma * std::abs(s);
}

// Minimizer of the 1-D cost by scanning [lo, hi] at the given step.
double grid_argmin(const RealVector& r, const RealVector& a, double alpha, double gamma, double lo, double hi,
                   double step) {
  double best_s = lo, best = scalar_cost(r, a, lo, alpha, gamma);
  const long n = static_cast<long>(std::llround((hi - lo) / step));
  for (long i = 1; i <= n; ++i) {
    const double s = lo + static_cast<double>(i) * step;
    const double v = scalar_cost(r, a, s, alpha, gamma);
    if (v < best) {
      best = v;
      best_s = s;
    }
  }
  return best_s;
}

CoderStop exhaustive_stop() {
  CoderStop s;
  s.residual_threshold = 0.0;
  s.objective_rel_tol = 0.0;
  s.max_sweeps = 500;
  return s;
}

}  // namespace

TEST_CASE("scalar subproblem: least squares when smooth and unpenalized") {
  CounterRng rng(1);
  for (int t = 0; t < 50; ++t) {
    const RealVector r = random_vector(rng, 5);
    const RealVector a = random_vector(rng, 5);
    CHECK(solve_scalar_subproblem(r, a, 1.0, 0.0) == doctest::Approx(a.dot(r) / a.dot(a)).epsilon(1e-12));
  }
}

TEST_CASE("scalar subproblem: zero above the subgradient threshold") {
  CounterRng rng(2);
  for (int t = 0; t < 50; ++t) {
    const RealVector r = random_vector(rng, 4);
    const RealVector a = random_vector(rng, 4);
    const double alpha = rng.uniform();
    const double gamma = alpha * 2.0 * std::abs(a.dot(r)) + (1 - alpha) * a.lpNorm<1>();
    CHECK(solve_scalar_subproblem(r, a, alpha, gamma) == 0.0);
    CHECK(solve_scalar_subproblem(r, a, alpha, gamma * 1.5) == 0.0);
  }
}

TEST_CASE("scalar subproblem: fine grid scan") {
  RealVector r(2), a(2);
  r << 1, -1;
  a << 1, 1;
  const double s = solve_scalar_subproblem(r, a, 0.5, 0.1);
  CHECK(std::abs(s - grid_argmin(r, a, 0.5, 0.1, -5.0, 5.0, 1e-6)) <= 1e-5);

  CounterRng rng(3);
  for (int t = 0; t < 40; ++t) {
    const RealVector rr = random_vector(rng, 3);
    const RealVector aa = random_vector(rng, 3);
    const double alpha = t % 4 == 0 ? 0.0 : rng.uniform();
    const double gamma = 0.3 * rng.uniform();
    const double got = solve_scalar_subproblem(rr, aa, alpha, gamma);
    const double want = grid_argmin(rr, aa, alpha, gamma, -5.0, 5.0, 1e-5);
    // Flat minima (alpha = 0) may admit a segment of minimizers: compare costs.
    CHECK(scalar_cost(rr, aa, got, alpha, gamma) <= scalar_cost(rr, aa, want, alpha, gamma) + 1e-9);
  }
}

TEST_CASE("scalar subproblem errors") {
  RealVector r = RealVector::Ones(3);
  CHECK(kind_of([&] { solve_scalar_subproblem(r, RealVector::Zero(3), 0.5, 0.1); }) == ErrorKind::ZeroAtom);
  CHECK(kind_of([&] { solve_scalar_subproblem(r, RealVector::Ones(2), 0.5, 0.1); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { solve_scalar_subproblem(r, r, 1.5, 0.1); }) == ErrorKind::AlphaOutOfRange);
}

TEST_CASE("hybrid coder recovers a single unit atom") {
  CounterRng rng(4);
  RealMatrix d = random_matrix(rng, 8, 6);
  d.colwise().normalize();
  const RealVector y = d.col(3);
  const RealVector x = sparse_code_hybrid(y, d, 1.0, 1e-6, exhaustive_stop());
  RealVector e3 = RealVector::Zero(6);
  e3[3] = 1.0;
  CHECK((x - e3).lpNorm<Eigen::Infinity>() <= 1e-3);
}

TEST_CASE("hybrid coder on a zero signal") {
  const RealMatrix d = RealMatrix::Identity(4, 4);
  const HybridCoder coder(d, 0.7, 0.05);
  const HybridCode c = coder.code(RealVector::Zero(4));
  CHECK(c.x.isZero(0.0));
  CHECK(c.sweeps == 0);
  CHECK(c.exit == CoderExit::Residual);
}

TEST_CASE("hybrid coder matches the subgradient oracle") {
  CounterRng rng(5);
  for (int t = 0; t < 4; ++t) {
    RealMatrix d = random_matrix(rng, 6, 10);
    d.colwise().normalize();
    const RealVector y = random_vector(rng, 6);
    const double alpha = t < 2 ? 0.7 : 1.0;
    const double gamma = 0.05;
    const HybridCoder coder(d, alpha, gamma, exhaustive_stop());
    const HybridCode c = coder.code(y);
    const double want = oracle::subgradient_min(y, d, alpha, gamma);
    CHECK(c.objective == doctest::Approx(oracle::hybrid_cost(y, d, c.x, alpha, gamma)).epsilon(1e-12));
    CHECK(c.objective <= want + 1e-4);
    CHECK(c.objective >= want - 1e-4);
  }
}

TEST_CASE("hybrid coder property: objective trace never increases") {
  CounterRng rng(6);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index m = 2 + rng.below(10);
    const Eigen::Index n = 2 + rng.below(20);
    const RealMatrix d = random_matrix(rng, m, n);
    const RealVector y = random_vector(rng, m);
    const double alpha = rng.uniform();
    const HybridCoder coder(d, alpha, 0.2 * rng.uniform(), exhaustive_stop());
    const HybridCode c = coder.code(y);
    REQUIRE(!c.trace.empty());
    for (std::size_t i = 1; i < c.trace.size(); ++i) CHECK(c.trace[i] <= c.trace[i - 1] + 1e-12);
    CHECK(c.objective == c.trace.back());
  }
}

TEST_CASE("hybrid coder property: lasso optimality certificate") {
  CounterRng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index m = 3 + rng.below(6);
    const Eigen::Index n = 2 + rng.below(8);
    const RealMatrix d = random_matrix(rng, m, n);
    const RealVector y = random_vector(rng, m);
    const double gamma = 0.05 + 0.5 * rng.uniform();
    const HybridCoder coder(d, 1.0, gamma, exhaustive_stop());
    const RealVector x = coder.code(y).x;
    const RealVector g = 2.0 * d.transpose() * (y - d * x);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (x[j] == 0.0)
        CHECK(std::abs(g[j]) <= gamma + 1e-6);
      else
        CHECK(std::abs(g[j] - gamma * oracle::sgn(x[j])) <= 1e-6);
    }
  }
}

TEST_CASE("hybrid coder property: residual stop is honoured") {
  CounterRng rng(8);
  RealMatrix d = random_matrix(rng, 5, 12);
  d.colwise().normalize();
  CoderStop stop;
  stop.residual_threshold = 0.3;
  const HybridCoder coder(d, 0.7, 0.001, stop);
  for (int t = 0; t < 20; ++t) {
    const HybridCode c = coder.code(random_vector(rng, 5));
    if (c.exit == CoderExit::Residual) CHECK(c.residual_norm <= 0.3);
  }
}

TEST_CASE("hybrid coder: warm start cannot raise the objective") {
  CounterRng rng(9);
  const RealMatrix d = random_matrix(rng, 6, 8);
  const RealVector y = random_vector(rng, 6);
  const HybridCoder coder(d, 0.7, 0.1);
  const HybridCode cold = coder.code(y);
  const HybridCode warm = coder.code(y, cold.x);
  CHECK(warm.objective <= cold.objective);
}

TEST_CASE("hybrid coder errors") {
  RealMatrix d = RealMatrix::Identity(3, 3);
  CHECK(kind_of([&] { HybridCoder(d, 0.5, 0.1).code(RealVector::Ones(4)); }) == ErrorKind::DimensionMismatch);
  RealVector y = RealVector::Ones(3);
  y[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { HybridCoder(d, 0.5, 0.1).code(y); }) == ErrorKind::NonFiniteInput);
  d(2, 2) = 0.0;
  CHECK(kind_of([&] { HybridCoder(d, 0.5, 0.1); }) == ErrorKind::ZeroColumn);
  d(2, 2) = std::numeric_limits<double>::infinity();
  CHECK(kind_of([&] { HybridCoder(d, 0.5, 0.1); }) == ErrorKind::NonFiniteInput);
  CHECK(kind_of([] { HybridCoder(RealMatrix::Identity(2, 2), 0.5, -1.0); }) == ErrorKind::BadParameter);
  CHECK(kind_of([] { sparse_code_hybrid(RealVector::Ones(2), RealMatrix::Identity(3, 3), 0.5, 0.1); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("omp: orthonormal recovery") {
  CounterRng rng(10);
  const RealMatrix q = Eigen::HouseholderQR<RealMatrix>(random_matrix(rng, 6, 6)).householderQ();
  const RealVector y = 2.0 * q.col(1) + 3.0 * q.col(5);
  const OmpCode c = sparse_code_omp(y, q, 1e-12, 6);
  REQUIRE(c.support.size() == 2);
  CHECK(c.support[0] == 5);
  CHECK(c.support[1] == 1);
  CHECK(c.x[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.x[5] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(c.x.lpNorm<1>() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("omp: zero signal") {
  const OmpCode c = sparse_code_omp(RealVector::Zero(3), RealMatrix::Identity(3, 3), 0.01, 3);
  CHECK(c.support.empty());
  CHECK(c.x.isZero(0.0));
}

TEST_CASE("omp: within 10% of the best 2-sparse fit") {
  CounterRng rng(11);
  int good = 0;
  for (int t = 0; t < 20; ++t) {
    // Overcomplete, so atoms are mutually coherent.
    RealMatrix d = random_matrix(rng, 8, 12);
    d.colwise().normalize();
    const Eigen::Index a = rng.below(12);
    const Eigen::Index b = (a + 1 + rng.below(11)) % 12;
    const RealVector y = (1.0 + rng.uniform()) * d.col(a) - (1.0 + rng.uniform()) * d.col(b) +
                         0.01 * random_vector(rng, 8);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < 12; ++i)
      for (Eigen::Index j = i + 1; j < 12; ++j) {
        RealMatrix sub(8, 2);
        sub << d.col(i), d.col(j);
        const RealVector coef = sub.colPivHouseholderQr().solve(y);
        best = std::min(best, (y - sub * coef).norm());
      }
    const OmpCode c = sparse_code_omp(y, d, 0.0, 2);
    // Greedy selection can miss on some draws; the exhaustive fit bounds it below.
    CHECK(c.residual_norm >= best - 1e-12);
    if (t == 0) CHECK(c.residual_norm <= 1.1 * best);
    good += c.residual_norm <= 1.1 * best;
  }
  CHECK(good >= 10);
}

TEST_CASE("omp property: residual decreases and is orthogonal to the support") {
  CounterRng rng(12);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index m = 3 + rng.below(10);
    RealMatrix d = random_matrix(rng, m, 2 + rng.below(20));
    d.colwise().normalize();
    const RealVector y = random_vector(rng, m);
    const OmpCode c = sparse_code_omp(y, d, 1e-3, static_cast<int>(m));
    for (std::size_t i = 1; i < c.residual_history.size(); ++i)
      CHECK(c.residual_history[i] < c.residual_history[i - 1]);
    const RealVector r = y - d * c.x;
    CHECK(r.norm() == doctest::Approx(c.residual_norm).epsilon(1e-9));
    for (Eigen::Index j : c.support) CHECK(std::abs(d.col(j).dot(r)) <= 1e-10);
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      if (std::find(c.support.begin(), c.support.end(), j) == c.support.end()) CHECK(c.x[j] == 0.0);
  }
}

TEST_CASE("omp: duplicated atoms do not break the refit") {
  RealMatrix d(3, 3);
  d << 1, 1, 0, 0, 0, 1, 0, 0, 0;
  RealVector y(3);
  y << 2, 1, 0.5;
  const OmpCode c = sparse_code_omp(y, d, 0.0, 3);
  REQUIRE(c.support.size() == 2);
  CHECK(c.support[0] == 0);
  CHECK(c.support[1] == 2);
  CHECK(c.x[1] == 0.0);
  CHECK(c.residual_norm == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("omp errors") {
  CHECK(kind_of([] { sparse_code_omp(RealVector::Ones(2), RealMatrix::Identity(3, 3), 0.01, 3); }) ==
        ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { sparse_code_omp(RealVector::Ones(3), RealMatrix::Identity(3, 3), 0.01, 0); }) ==
        ErrorKind::BadParameter);
}
