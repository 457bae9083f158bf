#include "srcbench/classify.hpp"

#include <stdexcept>

namespace srcbench {

namespace {

// argmin with ties within 1e-12 resolved to the lower class id
int argmin_label(const Vec& residuals) {
  int best = 0;
  for (Index i = 1; i < residuals.size(); ++i)
    if (residuals(i) < residuals(best) - 1e-12) best = static_cast<int>(i);
  return best;
}

Vec class_residuals(const Gallery& g, const Vec& y, const Vec& x,
                    const Vec& e) {
  Vec residuals(static_cast<Index>(g.class_ranges.size()));
  for (const ClassRange& r : g.class_ranges)
    residuals(r.class_id) =
        (y - g.a.middleCols(r.start, r.count) * x.segment(r.start, r.count) -
         e)
            .norm();
  return residuals;
}

// Shared l2 pipeline; w may have zero columns, which is exactly the plain
// method.
Decision l2_decide(const Gallery& g, const Mat& w, const Vec& y) {
  if (y.size() != g.a.rows())
    throw std::invalid_argument("classify: y length != gallery pixel count");
  Mat aw(g.a.rows(), g.a.cols() + w.cols());
  aw.leftCols(g.a.cols()) = g.a;
  aw.rightCols(w.cols()) = w;
  const Vec xv = min_norm_lsq(aw, y);

  Decision d;
  d.solution.x = xv.head(g.a.cols());
  d.solution.e = w.cols() > 0 ? Vec(w * xv.tail(w.cols()))
                              : Vec(Vec::Zero(y.size()));
  d.solution.converged = true;
  d.residuals = class_residuals(g, y, d.solution.x, Vec::Zero(y.size()));
  d.label = argmin_label(d.residuals);
  return d;
}

}  // namespace

Decision classify_src(const Gallery& g, const Vec& y,
                      const SolverConfig& cfg) {
  Decision d;
  d.solution = solve_l1l1(g.a, y, cfg);
  d.converged = d.solution.converged;
  d.residuals = class_residuals(g, y, d.solution.x, d.solution.e);
  d.label = argmin_label(d.residuals);
  return d;
}

Decision classify_l2_plain(const Gallery& g, const Vec& y) {
  return l2_decide(g, Mat(g.a.rows(), 0), y);
}

Decision classify_l2_occlusion(const Gallery& g, const OcclusionBasis& w,
                               const Vec& y) {
  if (w.w.cols() == 0)
    throw std::invalid_argument("classify_l2_occlusion: zero-width basis");
  if (w.w.rows() != g.a.rows())
    throw std::invalid_argument(
        "classify_l2_occlusion: basis does not match gallery pixels");
  return l2_decide(g, w.w, y);
}

Decision classify(const Gallery& g, const Method& m, const Vec& y) {
  if (std::holds_alternative<Src>(m.tag))
    return classify_src(g, y, m.solver_cfg);
  if (std::holds_alternative<L2Plain>(m.tag)) return classify_l2_plain(g, y);
  return classify_l2_occlusion(g, std::get<L2Occlusion>(m.tag).basis, y);
}

}  // namespace srcbench
