#pragma once

#include "srcbench/gallery.hpp"
#include "srcbench/solvers.hpp"

#include <variant>

namespace srcbench {

struct Src {};
struct L2Plain {};
struct L2Occlusion {
  OcclusionBasis basis;
};

struct Method {
  std::variant<Src, L2Plain, L2Occlusion> tag = Src{};
  SolverConfig solver_cfg;
};

struct Decision {
  int label = 0;
  // Indexed by class id. label = argmin with ties within 1e-12 going to the
  // lower id.
  Vec residuals;
  // Src: the full sparse solve. l2 paths: x = gallery coefficients,
  // e = the fitted non-gallery component (W v for the occlusion method,
  // zero for the plain one).
  SparseSolution solution;
  bool converged = true;
};

// SRC rule: solve the l1+l1 program over [A | I], then
// residual_i = ||y - A_i x_i - e||_2. A non-converged solve still
// classifies from the best iterate, flagged through `converged`.
Decision classify_src(const Gallery& g, const Vec& y,
                      const SolverConfig& cfg = {});

// Minimum-norm least squares x of y ~ A x; residual_i = ||y - A_i x_i||_2.
Decision classify_l2_plain(const Gallery& g, const Vec& y);

// Minimum-norm least squares (x, v) of y ~ A x + W v; the per-class
// residual stays ||y - A_i x_i||_2 with W v excluded, exactly as the
// occlusion-aware program prints its decision rule.
Decision classify_l2_occlusion(const Gallery& g, const OcclusionBasis& w,
                               const Vec& y);

Decision classify(const Gallery& g, const Method& m, const Vec& y);

}  // namespace srcbench
