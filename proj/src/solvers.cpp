#include "srcbench/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace srcbench {

namespace {

using mu_schedule::kGrowThresh;
using mu_schedule::kMaxFactor;
using mu_schedule::stall_cap;

double norm_value(const Vec& v, Norm n) {
  return n == Norm::L1 ? v.lpNorm<1>() : v.norm();
}

Vec prox(const Vec& v, double tau, Norm n) {
  return n == Norm::L1 ? soft_threshold(v, tau) : shrink_l2(v, tau);
}

// Crossover to a basic point of an l1 program min ||z||_1 s.t. D z = r,
// where get_col(j) materializes column j of the implicit dictionary D.
// First-order iterations routinely land on the optimal face but freeze just
// off its vertex: the flat direction's per-iteration signal drops below
// float resolution, so a few excess support entries survive any budget.
// Walking along null-space directions of the active columns zeroes one
// entry per step, keeps D z unchanged up to float error, and never
// increases the objective; the walk ends with linearly independent active
// columns, i.e. at most rows(D) nonzero entries.
template <typename GetCol>
void crossover_to_basic(Index rows, Vec& z, GetCol get_col) {
  const double zmax = z.lpNorm<Eigen::Infinity>();
  if (zmax <= 0.0) return;
  const double tol = 1e-9 * zmax;
  std::vector<Index> act;
  for (Index j = 0; j < z.size(); ++j)
    if (std::abs(z[j]) > tol) act.push_back(j);
  const Index k0 = static_cast<Index>(act.size());
  if (k0 == 0) return;

  Mat b(rows, k0);
  for (Index i = 0; i < k0; ++i)
    b.col(i) = get_col(act[static_cast<std::size_t>(i)]);
  const Eigen::FullPivLU<Mat> lu(b);
  Index q = lu.dimensionOfKernel();
  if (q == 0) return;
  // Kernel basis of the active columns; row i belongs to act[i]. Removing
  // an entry pins its coordinate to zero by one elimination on this basis,
  // so the factorization is never redone.
  Mat kern = lu.kernel();

  while (q > 0 && !act.empty()) {
    const Index k = static_cast<Index>(act.size());
    Vec nu = kern.col(0);
    const double ninf = nu.lpNorm<Eigen::Infinity>();
    if (ninf <= 1e-12 * zmax) {  // numerically dead basis vector
      kern = kern.rightCols(q - 1).eval();
      --q;
      continue;
    }
    nu /= ninf;
    double slope = 0.0;
    for (Index i = 0; i < k; ++i)
      slope += (z[act[static_cast<std::size_t>(i)]] > 0.0 ? 1.0 : -1.0) * nu[i];
    if (slope > 0.0) nu = -nu;

    const auto blocking = [&](const Vec& dir) {
      Index arg = -1;
      double alpha = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < k; ++i) {
        const double zi = z[act[static_cast<std::size_t>(i)]];
        const double di = dir[i];
        if ((zi > 0.0 && di < 0.0) || (zi < 0.0 && di > 0.0)) {
          const double step = -zi / di;
          if (step < alpha) {
            alpha = step;
            arg = i;
          }
        }
      }
      return std::make_pair(arg, alpha);
    };
    auto [arg, alpha] = blocking(nu);
    if (arg < 0) {
      // The objective is flat along nu and unbounded that way; the opposite
      // ray must hit a sign change (the program is bounded below by 0).
      nu = -nu;
      std::tie(arg, alpha) = blocking(nu);
    }
    if (arg < 0 || alpha > 1e6 * zmax) break;  // defensive: ill-scaled basis

    for (Index i = 0; i < k; ++i)
      z[act[static_cast<std::size_t>(i)]] += alpha * nu[i];
    z[act[static_cast<std::size_t>(arg)]] = 0.0;

    // Eliminate the zeroed entry's row from the kernel basis.
    Index p = 0;
    kern.row(arg).cwiseAbs().maxCoeff(&p);
    if (kern(arg, p) != 0.0) {
      for (Index c = 0; c < q; ++c) {
        if (c == p) continue;
        kern.col(c) -= (kern(arg, c) / kern(arg, p)) * kern.col(p);
      }
      // drop column p and row arg
      Mat next(k - 1, q - 1);
      Index cc = 0;
      for (Index c = 0; c < q; ++c) {
        if (c == p) continue;
        Index rr = 0;
        for (Index r = 0; r < k; ++r) {
          if (r == arg) continue;
          next(rr++, cc) = kern(r, c);
        }
        ++cc;
      }
      kern = std::move(next);
      --q;
    } else {  // cannot happen: nu moved this coordinate; stay safe
      break;
    }
    act.erase(act.begin() + arg);
  }
}

// Largest eigenvalue of A^T A by power iteration from the ones vector
// (permutation-equivariant start). Returns 0 for a zero matrix.
double largest_gram_eigenvalue(const Mat& a) {
  if (a.size() == 0 || a.norm() == 0.0) return 0.0;
  const Index n = a.cols();
  Vec v = Vec::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec w = a.transpose() * (a * v);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / wn;
    if (it > 10 && std::abs(next - lambda) <= 1e-6 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace

SparseSolution solve_combo(const Mat& a, const Vec& y, ComboProgram prog,
                           const SolverConfig& cfg) {
  if (a.rows() != y.size())
    throw std::invalid_argument("solve_combo: a.rows() != len(y)");
  if (!a.allFinite() || !y.allFinite())
    throw std::invalid_argument("solve_combo: non-finite input");

  const Index n = a.cols(), m = a.rows();
  SparseSolution sol;
  sol.x = Vec::Zero(n);
  sol.e = Vec::Zero(m);

  const double ynorm = y.norm();
  if (ynorm == 0.0) {
    sol.converged = true;
    return sol;
  }

  const double mu0 = cfg.mu0 > 0.0 ? cfg.mu0 : 1.25 / ynorm;
  double mu = mu0;
  const double mu_max = kMaxFactor * mu0;
  // 1% headroom on the power-iteration estimate keeps the step inside the
  // Lipschitz bound.
  double rho = 1.01 * largest_gram_eigenvalue(a);
  if (rho <= 0.0) rho = 1.0;

  Vec lam = Vec::Zero(m);
  Vec ax = Vec::Zero(m);  // running A * x
  sol.objective_history.reserve(64);
  int iters_at_level = 0;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Vec e_next = prox(y - ax + lam / mu, 1.0 / mu, prog.e_norm);

    const double tau = 1.0 / (mu * rho);
    const Vec grad_point =
        sol.x + tau * mu * (a.transpose() * (y - ax - e_next + lam / mu));
    const Vec x_next = prox(grad_point, tau, prog.x_norm);

    const Vec ax_next = a * x_next;
    const Vec resid = y - ax_next - e_next;
    lam += mu * resid;

    const double rel_primal = resid.norm() / ynorm;
    // Both normalized by ||y|| (not iterate size) so the whole trajectory,
    // stopping decisions included, is covariant under y -> c*y.
    const double change =
        ((x_next - sol.x).norm() + (e_next - sol.e).norm()) / ynorm;

    sol.x = x_next;
    sol.e = e_next;
    ax = ax_next;
    sol.iters = k;
    sol.primal_residual = rel_primal;
    sol.objective =
        norm_value(sol.x, prog.x_norm) + norm_value(sol.e, prog.e_norm);
    // History records the folded value f(x) + g(y - a*x): the objective of
    // the always-feasible point (x, y - a*x). It upper-bounds the optimum at
    // every iteration, which makes it a meaningful monotonicity diagnostic;
    // the raw f(x) + g(e) of infeasible iterates approaches the optimum from
    // below and necessarily rises.
    sol.objective_history.push_back(norm_value(sol.x, prog.x_norm) +
                                    norm_value(y - ax, prog.e_norm));

    if (rel_primal <= cfg.tol_primal && change <= cfg.tol_dual) {
      sol.converged = true;
      break;
    }
    ++iters_at_level;
    if ((mu / mu0) * change < kGrowThresh || iters_at_level >= stall_cap(cfg.max_iters)) {
      mu = std::min(mu * cfg.mu_growth, mu_max);
      iters_at_level = 0;
    }
  }

  if (prog.x_norm == Norm::L1 && prog.e_norm == Norm::L1) {
    // The l1+l1 program is a linear program over [A | I]; finish at a basic
    // point so the solution is supported on at most m columns.
    Vec z(n + m);
    z.head(n) = sol.x;
    z.tail(m) = sol.e;
    crossover_to_basic(m, z, [&](Index j) -> Vec {
      return j < n ? Vec(a.col(j)) : Vec(Vec::Unit(m, j - n));
    });
    sol.x = z.head(n);
    sol.e = z.tail(m);
    sol.primal_residual = (y - a * sol.x - sol.e).norm() / ynorm;
    sol.objective = sol.x.lpNorm<1>() + sol.e.lpNorm<1>();
  }
  return sol;
}

SparseSolution solve_l1l1(const Mat& a, const Vec& y,
                          const SolverConfig& cfg) {
  return solve_combo(a, y, {Norm::L1, Norm::L1}, cfg);
}

namespace {

// Basis pursuit min ||z||_1 s.t. M z = c, single-block linearized ALM.
SparseSolution basis_pursuit(const Mat& m, const Vec& c,
                             const SolverConfig& cfg) {
  if (m.rows() != c.size())
    throw std::invalid_argument("basis_pursuit: shape mismatch");

  const Index n = m.cols();
  SparseSolution sol;
  sol.x = Vec::Zero(n);
  sol.e = Vec::Zero(0);

  const double cnorm = c.norm();
  if (cnorm == 0.0) {
    sol.converged = true;
    return sol;
  }

  const double mu0 = cfg.mu0 > 0.0 ? cfg.mu0 : 1.25 / cnorm;
  double mu = mu0;
  const double mu_max = kMaxFactor * mu0;
  double rho = 1.01 * largest_gram_eigenvalue(m);
  if (rho <= 0.0) rho = 1.0;

  Vec lam = Vec::Zero(m.rows());
  Vec mz = Vec::Zero(m.rows());
  sol.objective_history.reserve(64);
  int iters_at_level = 0;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double tau = 1.0 / (mu * rho);
    const Vec grad_point =
        sol.x + tau * mu * (m.transpose() * (c - mz + lam / mu));
    const Vec z_next = soft_threshold(grad_point, tau);

    const Vec mz_next = m * z_next;
    const Vec resid = c - mz_next;
    lam += mu * resid;

    const double rel_primal = resid.norm() / cnorm;
    const double change = (z_next - sol.x).norm() / cnorm;

    sol.x = z_next;
    mz = mz_next;
    sol.iters = k;
    sol.primal_residual = rel_primal;
    sol.objective = sol.x.lpNorm<1>();
    sol.objective_history.push_back(sol.objective);

    if (rel_primal <= cfg.tol_primal && change <= cfg.tol_dual) {
      sol.converged = true;
      break;
    }
    ++iters_at_level;
    if ((mu / mu0) * change < kGrowThresh || iters_at_level >= stall_cap(cfg.max_iters)) {
      mu = std::min(mu * cfg.mu_growth, mu_max);
      iters_at_level = 0;
    }
  }

  crossover_to_basic(m.rows(), sol.x,
                     [&](Index j) -> Vec { return Vec(m.col(j)); });
  sol.primal_residual = (c - m * sol.x).norm() / cnorm;
  sol.objective = sol.x.lpNorm<1>();
  return sol;
}

}  // namespace

SparseSolution solve_projected(const Mat& a, const Vec& y, const Mat& phi,
                               ProjectedVariant variant,
                               const SolverConfig& cfg) {
  if (phi.cols() != a.rows() || a.rows() != y.size())
    throw std::invalid_argument("solve_projected: shape mismatch");
  if (phi.rows() > a.rows())
    throw std::invalid_argument("solve_projected: phi.rows() > a.rows()");

  const Vec py = phi * y;
  const Mat pa = phi * a;

  if (variant == ProjectedVariant::ProjectedE) {
    // error variable has the feature dimension; this is the plain combo
    // program on the projected data
    return solve_combo(pa, py, {Norm::L1, Norm::L1}, cfg);
  }

  // SparseE: error keeps the image dimension, so solve basis pursuit on the
  // stacked dictionary [phi*A | phi].
  Mat stacked(phi.rows(), a.cols() + phi.cols());
  stacked.leftCols(a.cols()) = pa;
  stacked.rightCols(phi.cols()) = phi;
  SparseSolution bp = basis_pursuit(stacked, py, cfg);

  SparseSolution sol;
  sol.x = bp.x.head(a.cols());
  sol.e = bp.x.tail(phi.cols());
  sol.iters = bp.iters;
  sol.primal_residual = bp.primal_residual;
  sol.objective = bp.objective;
  sol.converged = bp.converged;
  sol.objective_history = std::move(bp.objective_history);
  return sol;
}

Vec solve_l2l2_closed(const Mat& a, const Vec& y, double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("solve_l2l2_closed: gamma <= 0");
  if (a.rows() != y.size())
    throw std::invalid_argument("solve_l2l2_closed: shape mismatch");
  const Index n = a.cols();
  const Mat lhs =
      a.transpose() * a + Mat::Identity(n, n) / gamma;
  return Eigen::LDLT<Mat>(lhs).solve(a.transpose() * y);
}

// ---------------------------------------------------------------------------
// LP oracle: primal simplex on min 1^T z s.t. E z = b, z >= 0 with
// E = [A, -A, I, -I]. The [I, -I] block always admits the starting basis
// e = y, x = 0, so no phase-1 artificials are needed.
// ---------------------------------------------------------------------------

LpSolution lp_oracle_l1l1(const Mat& a, const Vec& y) {
  const Index m = a.rows(), n = a.cols();
  if (m > 12 || n > 6)
    throw std::invalid_argument("lp_oracle_l1l1: desk-scale cap exceeded");
  if (m != y.size())
    throw std::invalid_argument("lp_oracle_l1l1: a.rows() != len(y)");

  const Index nv = 2 * n + 2 * m;  // [u; v; p; q]
  Mat e(m, nv);
  e.block(0, 0, m, n) = a;
  e.block(0, n, m, n) = -a;
  e.block(0, 2 * n, m, m) = Mat::Identity(m, m);
  e.block(0, 2 * n + m, m, m) = -Mat::Identity(m, m);

  // Tableau rows: [B^-1 E | B^-1 b]; starting basis picks +e_i or -e_i per
  // row depending on the sign of y_i.
  Mat tab(m, nv + 1);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const double s = y(i) >= 0.0 ? 1.0 : -1.0;
    tab.row(i).head(nv) = s * e.row(i);
    tab(i, nv) = s * y(i);
    basis[static_cast<std::size_t>(i)] = (s > 0.0 ? 2 * n + i : 2 * n + m + i);
  }

  const double eps = 1e-11 * std::max(1.0, y.lpNorm<Eigen::Infinity>());
  std::vector<char> in_basis(static_cast<std::size_t>(nv), 0);
  for (Index b : basis) in_basis[static_cast<std::size_t>(b)] = 1;

  for (int iter = 0; iter < 20000; ++iter) {
    // reduced costs r_j = 1 - sum_i tab(i, j) (all costs are 1)
    Index entering = -1;
    for (Index j = 0; j < nv; ++j) {
      if (in_basis[static_cast<std::size_t>(j)]) continue;
      const double rj = 1.0 - tab.col(j).sum();
      if (rj < -eps) {  // Bland: first improving index
        entering = j;
        break;
      }
    }
    if (entering < 0) break;  // optimal

    // ratio test, Bland tie-break on smallest basis index
    Index leave_row = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i) {
      const double d = tab(i, entering);
      if (d > eps) {
        const double ratio = tab(i, nv) / d;
        if (ratio < best_ratio - eps ||
            (ratio < best_ratio + eps &&
             (leave_row < 0 || basis[static_cast<std::size_t>(i)] <
                                   basis[static_cast<std::size_t>(leave_row)]))) {
          best_ratio = ratio;
          leave_row = i;
        }
      }
    }
    if (leave_row < 0)
      throw std::runtime_error("lp_oracle_l1l1: unbounded (unexpected)");

    // pivot
    tab.row(leave_row) /= tab(leave_row, entering);
    for (Index i = 0; i < m; ++i) {
      if (i == leave_row) continue;
      const double f = tab(i, entering);
      if (f != 0.0) tab.row(i) -= f * tab.row(leave_row);
    }
    in_basis[static_cast<std::size_t>(
        basis[static_cast<std::size_t>(leave_row)])] = 0;
    basis[static_cast<std::size_t>(leave_row)] = entering;
    in_basis[static_cast<std::size_t>(entering)] = 1;
  }

  Vec z = Vec::Zero(nv);
  for (Index i = 0; i < m; ++i)
    z(basis[static_cast<std::size_t>(i)]) = std::max(0.0, tab(i, nv));

  LpSolution sol;
  sol.x = z.segment(0, n) - z.segment(n, n);
  sol.e = z.segment(2 * n, m) - z.segment(2 * n + m, m);
  sol.objective = z.sum();
  return sol;
}

}  // namespace srcbench
