#pragma once

#include "srcbench/numcore.hpp"

#include <algorithm>
#include <vector>

namespace srcbench {

// Penalty schedule shared by the augmented-Lagrangian loops (combo solvers
// and rpca): mu grows geometrically, but only once the iterates have settled
// at the current penalty — (mu/mu0) * relative iterate change below
// kGrowThresh — or after a budget-scaled cap of iterations at one level.
// Growing every iteration instead freezes the l1 prox steps before the
// support is identified, stalling at feasible but suboptimal points. The
// ladder is ~40 levels deep at growth 1.5, so stall_cap scales max_iters by
// that depth and raising the budget buys accuracy rather than idling at the
// penalty ceiling.
namespace mu_schedule {
constexpr double kMaxFactor = 1e7;    // mu ceiling = kMaxFactor * mu0
constexpr double kGrowThresh = 1e-4;  // settle test on (mu/mu0) * change
inline int stall_cap(int max_iters) { return std::max(50, max_iters / 40); }
}  // namespace mu_schedule

enum class Norm { L1, L2 };

// One of the four x-norm / e-norm pairings of
//   minimize f(x) + g(e)  subject to  y = A x + e
// with f, g unsquared l1 or l2 norms.
struct ComboProgram {
  Norm x_norm = Norm::L1;
  Norm e_norm = Norm::L1;
};

struct SolverConfig {
  int max_iters = 2000;      // also scales the per-penalty-level stall cap,
                             // so a larger budget buys a more accurate optimum
  double tol_primal = 1e-7;  // relative to ||y||
  double tol_dual = 1e-7;    // successive-iterate change, relative to ||y||
  double mu0 = 0.0;          // initial penalty; <= 0 means 1.25 / ||y||_2
  double mu_growth = 1.5;    // growth factor, capped at 1e7 * mu0
};

struct SparseSolution {
  Vec x;
  Vec e;
  int iters = 0;
  double primal_residual = 0.0;  // relative, at the final iterate
  double objective = 0.0;        // f(x) + g(e)
  bool converged = false;
  // Per-iteration folded objective f(x_k) + g(y - A x_k), i.e. the value of
  // the always-feasible pair (x_k, y - A x_k). An upper bound on the optimum
  // at every iteration (diagnostics; see solve_combo).
  std::vector<double> objective_history;
};

// Augmented-Lagrangian splitting: exact prox on the e block, one linearized
// proximal step on the x block per iteration (step 1/(mu * rho(A^T A)),
// rho estimated by power iteration), multiplier update, geometric mu growth.
// Non-convergence is reported through the flag, never thrown.
// For the l1+l1 program the iterate is finished by a crossover to a basic
// point: null-space steps over the active columns of [A | I] that keep
// A x + e fixed and never increase the objective, so the returned support
// has at most rows(A) entries.
SparseSolution solve_combo(const Mat& a, const Vec& y, ComboProgram prog,
                           const SolverConfig& cfg = {});

// The l1+l1 program: basis pursuit over [A | I] (identity block kept
// unnormalized so e stays in pixel units).
SparseSolution solve_l1l1(const Mat& a, const Vec& y,
                          const SolverConfig& cfg = {});

struct LpSolution {
  double objective = 0.0;
  Vec x;
  Vec e;
};

// Exact optimum of the l1+l1 program via the nonnegative-split LP
// reformulation, solved by a self-contained primal simplex (Bland's rule).
// Desk-scale only: requires a.rows() <= 12 and a.cols() <= 6.
LpSolution lp_oracle_l1l1(const Mat& a, const Vec& y);

enum class ProjectedVariant {
  SparseE,     // error lives in the image domain:   phi*y = phi*A x + phi*e
  ProjectedE,  // error lives in the feature domain: phi*y = phi*A x + e'
};

SparseSolution solve_projected(const Mat& a, const Vec& y, const Mat& phi,
                               ProjectedVariant variant,
                               const SolverConfig& cfg = {});

// Closed-form minimizer of the squared surrogate ||x||_2^2 + gamma *
// ||y - A x||_2^2, used as an independent stationarity cross-check for the
// l2/l2 combo.
Vec solve_l2l2_closed(const Mat& a, const Vec& y, double gamma);

}  // namespace srcbench
