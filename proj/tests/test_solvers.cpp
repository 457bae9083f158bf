#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "srcbench/solvers.hpp"

#include <algorithm>
#include <cmath>

using namespace srcbench;

namespace {

// Unit-norm Gaussian dictionary, deterministic per seed.
Mat dictionary(Index m, Index n, Rng& rng) {
  Mat a = gaussian_mat(m, n, rng);
  for (Index j = 0; j < n; ++j) a.col(j).normalize();
  return a;
}

Vec random_vec(Index n, Rng& rng) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

double combo_objective(const Mat& a, const Vec& y, ComboProgram prog,
                       const Vec& x) {
  const Vec e = y - a * x;
  const double fx = prog.x_norm == Norm::L1 ? x.lpNorm<1>() : x.norm();
  const double ge = prog.e_norm == Norm::L1 ? e.lpNorm<1>() : e.norm();
  return fx + ge;
}

// Accuracy-oriented budget: the stall cap scales with max_iters, so a large
// budget lets every penalty level settle instead of being forced forward.
SolverConfig accurate_cfg() {
  SolverConfig cfg;
  cfg.max_iters = 20000;
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// lp_oracle_l1l1 (the independent simplex path; validated first, then used
// as the reference for the iterative solver)
// ---------------------------------------------------------------------------

TEST_CASE("lp oracle: y = 0 gives objective 0") {
  Rng rng(1);
  Mat a = dictionary(5, 3, rng);
  LpSolution lp = lp_oracle_l1l1(a, Vec::Zero(5));
  CHECK(lp.objective == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lp.x.norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lp oracle: y equal to a unit column costs at most 1") {
  Vec col(4);
  col << 0.5, -0.5, 0.5, 0.5;  // unit norm
  Mat a = col;
  LpSolution lp = lp_oracle_l1l1(a, col);
  CHECK(lp.objective <= 1.0 + 1e-10);
  // x = (1), e = 0 is feasible with objective exactly 1; the simplex may not
  // beat it here because every pure-error representation costs ||col||_1 = 2.
  CHECK(lp.objective == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("lp oracle: hand-checkable two-pixel instances") {
  // a = (1, 0)^T, y = (2, 1): any x = t gives |t| + |2 - t| + 1 >= 3.
  Mat a(2, 1);
  a << 1.0, 0.0;
  Vec y(2);
  y << 2.0, 1.0;
  CHECK(lp_oracle_l1l1(a, y).objective == doctest::Approx(3.0).epsilon(1e-12));
  // y = (2, 0): optimum 2 (e.g. x = 2 or pure error).
  y << 2.0, 0.0;
  CHECK(lp_oracle_l1l1(a, y).objective == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lp oracle: returned point is feasible and matches its objective") {
  for (unsigned t = 0; t < 20; ++t) {
    Rng rng(Rng::mix({31, t}));
    const Index m = 6 + static_cast<Index>(rng.next_u64() % 7);
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 5);
    Mat a = dictionary(m, n, rng);
    Vec y = random_vec(m, rng);
    LpSolution lp = lp_oracle_l1l1(a, y);
    CHECK((a * lp.x + lp.e - y).norm() <= 1e-10 * y.norm());
    CHECK(lp.objective ==
          doctest::Approx(lp.x.lpNorm<1>() + lp.e.lpNorm<1>()).epsilon(1e-10));
  }
}

TEST_CASE("lp oracle: rejects instances beyond the desk-scale cap") {
  Rng rng(2);
  CHECK_THROWS_AS((void)lp_oracle_l1l1(dictionary(13, 3, rng), Vec::Zero(13)),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)lp_oracle_l1l1(dictionary(10, 7, rng), Vec::Zero(10)),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// solve_combo / solve_l1l1 against the oracle
// ---------------------------------------------------------------------------

TEST_CASE("solve_combo: zero datum returns zero for all four combos") {
  Rng rng(3);
  Mat a = dictionary(8, 3, rng);
  for (Norm xn : {Norm::L1, Norm::L2})
    for (Norm en : {Norm::L1, Norm::L2}) {
      SparseSolution s = solve_combo(a, Vec::Zero(8), {xn, en}, {});
      CHECK(s.converged);
      CHECK(s.x.norm() == 0.0);
      CHECK(s.e.norm() == 0.0);
      CHECK(s.objective == 0.0);
    }
}

TEST_CASE("solve_combo: rejects non-finite input and shape mismatch") {
  Rng rng(4);
  Mat a = dictionary(6, 2, rng);
  Vec bad = Vec::Zero(6);
  bad(3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)solve_combo(a, bad, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS((void)solve_combo(a, Vec::Zero(5), {}, {}),
                  std::invalid_argument);
}

TEST_CASE("oracle dominance: solver and simplex agree on tiny instances") {
  // Both directions within 1e-6, i.e. |objective difference| <= 1e-6.
  double worst = 0.0;
  for (unsigned t = 0; t < 20; ++t) {
    Rng rng(Rng::mix({1000, t}));
    const Index m = 6 + static_cast<Index>(rng.next_u64() % 7);
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 5);
    Mat a = dictionary(m, n, rng);
    Vec y = random_vec(m, rng);
    LpSolution lp = lp_oracle_l1l1(a, y);
    SparseSolution s = solve_l1l1(a, y, accurate_cfg());
    CHECK(s.converged);
    worst = std::max(worst, std::abs(s.objective - lp.objective));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("solve_combo: planted spike on an orthonormal 6x2 dictionary") {
  Rng rng(5);
  Mat g = gaussian_mat(6, 2, rng);
  Mat a = Eigen::HouseholderQR<Mat>(g).householderQ() * Mat::Identity(6, 2);
  Vec x0(2);
  x0 << 1.0, 0.0;
  Vec e0 = Vec::Zero(6);
  e0(3) = 5.0;
  Vec y = a * x0 + e0;
  SparseSolution s = solve_l1l1(a, y, accurate_cfg());
  CHECK(s.converged);
  CHECK((s.x - x0).norm() <= 1e-5);
  CHECK((s.e - e0).norm() <= 1e-5);
  // and the LP oracle confirms this is the global optimum of the instance
  LpSolution lp = lp_oracle_l1l1(a, y);
  CHECK(std::abs(s.objective - lp.objective) <= 1e-6);
  CHECK((lp.x - x0).norm() <= 1e-8);
}

TEST_CASE("solve_l1l1: a clean dictionary column is recovered as itself") {
  Rng rng(6);
  Mat a = dictionary(20, 4, rng);
  Vec y = a.col(1);
  SparseSolution s = solve_l1l1(a, y, accurate_cfg());
  CHECK(s.converged);
  Vec unit = Vec::Zero(4);
  unit(1) = 1.0;
  CHECK((s.x - unit).norm() <= 1e-5);
  CHECK(s.e.lpNorm<Eigen::Infinity>() <= 1e-5);
}

TEST_CASE("solve_combo: l2/l2 matches the closed-form stationary solution") {
  // Generic y sits too far from the span (x = 0 becomes optimal), so plant
  // an in-span target with moderate noise to keep both blocks active.
  int active = 0;
  for (unsigned t = 0; t < 10; ++t) {
    Rng rng(Rng::mix({900, t}));
    Mat a = dictionary(25, 6, rng);
    Vec y = a * random_vec(6, rng) + 0.15 * random_vec(25, rng);
    SolverConfig cfg;
    cfg.max_iters = 60000;
    cfg.tol_primal = 1e-9;
    cfg.tol_dual = 1e-10;
    SparseSolution s = solve_combo(a, y, {Norm::L2, Norm::L2}, cfg);
    CHECK(s.converged);
    const double xn = s.x.norm(), en = s.e.norm();
    if (xn < 1e-9 || en < 1e-9) continue;  // boundary solution; no gamma
    ++active;
    const Vec xc = solve_l2l2_closed(a, y, xn / en);
    const ComboProgram prog{Norm::L2, Norm::L2};
    // The valley is numerically flat along the x/e tradeoff, so the robust
    // comparison is by value; positions agree to a looser 1e-3.
    CHECK(std::abs(combo_objective(a, y, prog, s.x) -
                   combo_objective(a, y, prog, xc)) <= 1e-5);
    CHECK((s.x - xc).norm() / xc.norm() <= 1e-3);
  }
  CHECK(active >= 5);
}

TEST_CASE("solve_combo: l1-x with l2-e puts everything in e for generic y") {
  // With unit columns, ||x||_1 + ||y - a x||_2 >= ||y||_2 with equality at
  // x = 0, so the solver must land on the pure-error solution.
  Rng rng(8);
  Mat a = dictionary(40, 12, rng);
  Vec y = random_vec(40, rng);
  SparseSolution s = solve_combo(a, y, {Norm::L1, Norm::L2}, accurate_cfg());
  CHECK(s.converged);
  CHECK(s.x.norm() <= 1e-8);
  CHECK(s.objective == doctest::Approx(y.norm()).epsilon(1e-9));
}

// ---------------------------------------------------------------------------
// Invariants
// ---------------------------------------------------------------------------

TEST_CASE("invariant: converged solutions are feasible within tol_primal") {
  for (unsigned t = 0; t < 8; ++t) {
    Rng rng(Rng::mix({1100, t}));
    Mat a = dictionary(60, 15, rng);
    Vec y = random_vec(60, rng);
    for (Norm xn : {Norm::L1, Norm::L2})
      for (Norm en : {Norm::L1, Norm::L2}) {
        SolverConfig cfg;
        SparseSolution s = solve_combo(a, y, {xn, en}, cfg);
        if (!s.converged) continue;
        CHECK((y - a * s.x - s.e).norm() <= cfg.tol_primal * y.norm());
        CHECK(s.primal_residual <= cfg.tol_primal);
      }
  }
}

TEST_CASE("invariant: positive homogeneity of the optimal value") {
  const double c = 3.7;
  for (unsigned t = 0; t < 4; ++t) {
    Rng rng(Rng::mix({1200, t}));
    Mat a = dictionary(30, 8, rng);
    Vec y = a * random_vec(8, rng) + 0.3 * random_vec(30, rng);
    for (Norm xn : {Norm::L1, Norm::L2})
      for (Norm en : {Norm::L1, Norm::L2}) {
        SparseSolution s1 = solve_combo(a, y, {xn, en}, {});
        SparseSolution s2 = solve_combo(a, c * y, {xn, en}, {});
        CHECK(s2.objective ==
              doctest::Approx(c * s1.objective).epsilon(1e-5));
        CHECK(s2.iters == s1.iters);  // the whole trajectory is covariant
      }
  }
}

TEST_CASE("invariant: column-permutation equivariance") {
  Rng rng(9);
  Mat a = dictionary(30, 8, rng);
  Vec y = a * random_vec(8, rng) + 0.2 * random_vec(30, rng);
  // a fixed cyclic shift
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(8);
  for (Index i = 0; i < 8; ++i) perm.indices()(i) = (i + 3) % 8;
  Mat ap = a * perm;
  for (Norm xn : {Norm::L1, Norm::L2}) {
    SparseSolution s = solve_combo(a, y, {xn, Norm::L1}, {});
    SparseSolution sp = solve_combo(ap, y, {xn, Norm::L1}, {});
    CHECK((perm.transpose() * s.x - sp.x).norm() <= 1e-8);
    CHECK((s.e - sp.e).norm() <= 1e-8);
  }
}

TEST_CASE("invariant: deterministic given identical inputs") {
  Rng rng(10);
  Mat a = dictionary(50, 10, rng);
  Vec y = random_vec(50, rng);
  SparseSolution s1 = solve_l1l1(a, y, {});
  SparseSolution s2 = solve_l1l1(a, y, {});
  CHECK(s1.iters == s2.iters);
  CHECK((s1.x - s2.x).norm() == 0.0);
  CHECK((s1.e - s2.e).norm() == 0.0);
}

TEST_CASE("invariant: folded objective is nonincreasing over the final 10") {
  auto worst_increase = [](const std::vector<double>& h) {
    double worst = 0.0;
    for (std::size_t i = h.size() > 10 ? h.size() - 10 : 1; i < h.size(); ++i)
      worst = std::max(worst, h[i] - h[i - 1]);
    return worst;
  };
  // tiny l1/l1 instances at diagnostic tolerances
  for (unsigned t = 0; t < 20; ++t) {
    Rng rng(Rng::mix({1000, t}));
    const Index m = 6 + static_cast<Index>(rng.next_u64() % 7);
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 5);
    Mat a = dictionary(m, n, rng);
    Vec y = random_vec(m, rng);
    SolverConfig cfg;
    cfg.max_iters = 20000;
    cfg.tol_primal = 1e-9;
    cfg.tol_dual = 1e-12;
    SparseSolution s = solve_l1l1(a, y, cfg);
    CHECK(s.converged);
    CHECK(worst_increase(s.objective_history) <= 1e-9);
  }
  // all four combos on a mid-size dictionary
  for (Norm xn : {Norm::L1, Norm::L2})
    for (Norm en : {Norm::L1, Norm::L2})
      for (unsigned t = 0; t < 5; ++t) {
        Rng rng(Rng::mix({77, static_cast<unsigned>(xn), static_cast<unsigned>(en), t}));
        Mat a = dictionary(40, 12, rng);
        Vec y = random_vec(40, rng);
        SolverConfig cfg;
        cfg.max_iters = 60000;
        cfg.tol_primal = 1e-9;
        cfg.tol_dual = 3e-12;
        SparseSolution s = solve_combo(a, y, {xn, en}, cfg);
        CHECK(s.converged);
        CHECK(worst_increase(s.objective_history) <= 1e-9);
      }
}

TEST_CASE("invariant: exact recovery in the 200x30, 5-sparse, 20% regime") {
  int hits = 0;
  for (unsigned t = 0; t < 100; ++t) {
    Rng rng(Rng::mix({2000, t}));
    const Index m = 200, n = 30;
    Mat a = dictionary(m, n, rng);
    Vec x0 = Vec::Zero(n);
    for (int k = 0; k < 5; ++k)
      x0(static_cast<Index>(rng.next_u64() % n)) =
          2.0 * rng.normal() + (rng.next_u64() & 1 ? 1.0 : -1.0);
    Vec e0 = Vec::Zero(m);
    for (int k = 0; k < 40; ++k)  // 20% of 200 entries touched
      e0(static_cast<Index>(rng.next_u64() % m)) = 10.0 * (rng.uniform() - 0.5);
    Vec y = a * x0 + e0;
    SparseSolution s = solve_l1l1(a, y, {});
    const double err = std::sqrt((s.x - x0).squaredNorm() +
                                 (s.e - e0).squaredNorm()) /
                       std::sqrt(x0.squaredNorm() + e0.squaredNorm());
    if (s.converged && err <= 1e-4) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("non-convergence is reported, never thrown") {
  Rng rng(11);
  Mat a = dictionary(30, 8, rng);
  Vec y = random_vec(30, rng);
  SolverConfig cfg;
  cfg.max_iters = 3;  // far too few
  SparseSolution s = solve_l1l1(a, y, cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.iters == 3);
  CHECK(s.objective_history.size() == 3);
  CHECK(s.primal_residual > 0.0);
}

// ---------------------------------------------------------------------------
// solve_projected
// ---------------------------------------------------------------------------

TEST_CASE("solve_projected: identity projection coincides with solve_l1l1") {
  for (unsigned t = 0; t < 5; ++t) {
    Rng rng(Rng::mix({500, t}));
    Mat a = dictionary(30, 8, rng);
    Vec x0 = Vec::Zero(8);
    x0(2) = 1.5;
    x0(5) = -1.0;
    Vec e0 = Vec::Zero(30);
    e0(7) = 3.0;
    e0(21) = -2.0;
    Vec y = a * x0 + e0;
    SolverConfig cfg;
    cfg.max_iters = 60000;
    SparseSolution bp =
        solve_projected(a, y, Mat::Identity(30, 30), ProjectedVariant::SparseE, cfg);
    SparseSolution ref = solve_l1l1(a, y, cfg);
    CHECK(bp.converged);
    CHECK(std::abs(bp.objective - ref.objective) <= 1e-6);
  }
}

TEST_CASE("solve_projected: tiny ProjectedE instance against the LP oracle") {
  double worst = 0.0;
  for (unsigned t = 0; t < 20; ++t) {
    Rng rng(Rng::mix({600, t}));
    Mat a = dictionary(40, 4, rng);
    Vec y = random_vec(40, rng);
    Mat phi = gaussian_mat(10, 40, rng) / std::sqrt(40.0);
    SparseSolution s =
        solve_projected(a, y, phi, ProjectedVariant::ProjectedE, accurate_cfg());
    LpSolution lp = lp_oracle_l1l1(phi * a, phi * y);
    worst = std::max(worst, std::abs(s.objective - lp.objective));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("solve_projected: ProjectedE solutions obey the d-vertex bound") {
  Rng rng(700);
  const Index m = 500, n = 60, d = 40;
  Mat a = dictionary(m, n, rng);
  Vec x0 = Vec::Zero(n);
  x0(3) = 2.0;
  x0(33) = -1.0;
  Vec e0 = Vec::Zero(m);
  for (int k = 0; k < 150; ++k)
    e0(static_cast<Index>(rng.next_u64() % m)) = 4.0 * (rng.uniform() - 0.5);
  Vec y = a * x0 + e0;
  Mat phi = gaussian_mat(d, m, rng) / std::sqrt(static_cast<double>(m));
  SolverConfig cfg;
  cfg.max_iters = 20000;
  cfg.tol_primal = 1e-9;
  cfg.tol_dual = 1e-9;
  SparseSolution s = solve_projected(a, y, phi, ProjectedVariant::ProjectedE, cfg);
  CHECK(s.converged);
  int nnz = 0;
  for (Index i = 0; i < s.x.size(); ++i) nnz += std::abs(s.x(i)) > 1e-6;
  for (Index i = 0; i < s.e.size(); ++i) nnz += std::abs(s.e(i)) > 1e-6;
  CHECK(nnz <= static_cast<int>(d));
  CHECK(s.e.size() == d);  // e' lives in the feature domain
}

TEST_CASE("solve_projected: SparseE keeps e in the image domain") {
  Rng rng(701);
  Mat a = dictionary(50, 6, rng);
  Vec y = random_vec(50, rng);
  Mat phi = gaussian_mat(20, 50, rng) / std::sqrt(50.0);
  SparseSolution s = solve_projected(a, y, phi, ProjectedVariant::SparseE, {});
  CHECK(s.e.size() == 50);
  CHECK(s.x.size() == 6);
  CHECK_THROWS_AS(
      (void)solve_projected(a, y, gaussian_mat(20, 49, rng), ProjectedVariant::SparseE, {}),
      std::invalid_argument);
}

// ---------------------------------------------------------------------------
// solve_l2l2_closed
// ---------------------------------------------------------------------------

TEST_CASE("solve_l2l2_closed: zero datum and invalid gamma") {
  Rng rng(12);
  Mat a = dictionary(6, 3, rng);
  CHECK(solve_l2l2_closed(a, Vec::Zero(6), 2.0).norm() == 0.0);
  CHECK_THROWS_AS((void)solve_l2l2_closed(a, Vec::Zero(6), 0.0),
                  std::invalid_argument);
}

TEST_CASE("solve_l2l2_closed: large gamma approaches the exact inverse") {
  Rng rng(13);
  Mat a = gaussian_mat(4, 4, rng);
  a += 4.0 * Mat::Identity(4, 4);  // comfortably invertible
  Vec y = random_vec(4, rng);
  Vec x = solve_l2l2_closed(a, y, 1e8);
  Vec xref = a.partialPivLu().solve(y);
  CHECK((x - xref).norm() <= 1e-5);
}

TEST_CASE("solve_l2l2_closed: finite-difference stationarity on 5x3") {
  Rng rng(14);
  Mat a = dictionary(5, 3, rng);
  Vec y = random_vec(5, rng);
  const double gamma = 2.5;
  Vec x = solve_l2l2_closed(a, y, gamma);
  auto f = [&](const Vec& v) {
    return v.squaredNorm() + gamma * (y - a * v).squaredNorm();
  };
  const double h = 1e-6;
  for (Index i = 0; i < 3; ++i) {
    Vec hi = x, lo = x;
    hi(i) += h;
    lo(i) -= h;
    CHECK(std::abs(f(hi) - f(lo)) / (2.0 * h) <= 1e-8);
  }
}
