#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "srcbench/classify.hpp"
#include "srcbench/perturb.hpp"

#include <cmath>

using namespace srcbench;

namespace {

// Three classes spanning mutually orthogonal 2-dim subspaces of a common
// orthonormal frame; optionally keeps everything orthogonal to the all-ones
// direction by centering the frame before orthonormalization.
Gallery orthogonal_gallery(Index height, Index width, std::uint64_t seed,
                           bool zero_mean = false) {
  const Index m = height * width;
  Rng rng(seed);
  Mat gauss = gaussian_mat(m, 6, rng);
  if (zero_mean)
    gauss.rowwise() -= gauss.colwise().mean();
  const Mat q =
      Eigen::HouseholderQR<Mat>(gauss).householderQ() * Mat::Identity(m, 6);

  Gallery g;
  g.height = height;
  g.width = width;
  g.a.resize(m, 9);
  for (int c = 0; c < 3; ++c) {
    for (int j = 0; j < 3; ++j) {
      Vec col = q.col(2 * c) * rng.normal() + q.col(2 * c + 1) * rng.normal();
      g.a.col(3 * c + j) = col / col.norm();
    }
    g.class_ranges.push_back({c, std::to_string(c), 3 * c, 3});
  }
  return g;
}

}  // namespace

// --- classify_src -----------------------------------------------------------

TEST_CASE("classify_src: exact training column, oracle-confirmed optimum") {
  SynthSpec tiny;
  tiny.n_classes = 2;
  tiny.subspace_dim = 2;
  tiny.images_per_class = 2;
  tiny.ambient_dim = 8;
  tiny.seed = 41;
  tiny.tests_per_class = 1;
  const Gallery g = synth_gallery(tiny).first;
  const Vec y = g.a.col(0);

  // unit-norm columns force objective >= 1, attained only by the indicator
  const LpSolution lp = lp_oracle_l1l1(g.a, y);
  CHECK(lp.objective == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(lp.x(0) - 1.0) <= 1e-9);

  SolverConfig cfg;
  cfg.max_iters = 20000;
  const Decision d = classify_src(g, y, cfg);
  CHECK(d.converged);
  CHECK(d.label == 0);
  CHECK(d.residuals(0) <= 1e-4);
}

TEST_CASE("classify_src: exact column on a larger well-separated gallery") {
  SynthSpec spec;
  spec.n_classes = 3;
  spec.subspace_dim = 3;
  spec.images_per_class = 6;
  spec.ambient_dim = 100;
  spec.seed = 42;
  spec.tests_per_class = 1;
  const Gallery g = synth_gallery(spec).first;
  const ClassRange& r1 = g.range_of(1);
  const Vec y = g.a.col(r1.start + 2);

  const Decision d = classify_src(g, y);
  CHECK(d.converged);
  CHECK(d.label == 1);
  CHECK(d.residuals(1) <= 1e-4);
}

TEST_CASE("classify_src: single class galleries label trivially") {
  SynthSpec spec;
  spec.n_classes = 1;
  spec.subspace_dim = 2;
  spec.images_per_class = 4;
  spec.ambient_dim = 30;
  spec.seed = 43;
  spec.tests_per_class = 1;
  const auto [g, ts] = synth_gallery(spec);
  CHECK(classify_src(g, ts.y.col(0)).label == 0);
}

TEST_CASE("classify_src: 30% pixel corruption, class 2 still wins") {
  SynthSpec spec;
  spec.n_classes = 3;
  spec.subspace_dim = 5;
  spec.images_per_class = 10;
  spec.ambient_dim = 300;
  spec.seed = 44;
  spec.tests_per_class = 2;
  const auto [g, ts] = synth_gallery(spec);
  Index col = 0;
  while (ts.labels[static_cast<std::size_t>(col)] != 2) ++col;

  Rng rng(45);
  const PerturbedImage p = corrupt_pixels(ts.y.col(col), 0.3, rng);
  const Decision d = classify_src(g, p.y);
  CHECK(d.converged);
  CHECK(d.label == 2);
}

TEST_CASE("classify_src: label invariant under positive scaling of y") {
  SynthSpec spec;
  spec.n_classes = 3;
  spec.subspace_dim = 4;
  spec.images_per_class = 8;
  spec.ambient_dim = 120;
  spec.seed = 46;
  spec.tests_per_class = 1;
  const auto [g, ts] = synth_gallery(spec);
  Rng rng(47);
  const Vec y = corrupt_pixels(ts.y.col(1), 0.2, rng).y;

  const Decision base = classify_src(g, y);
  for (double c : {2.5, 1e-3, 40.0}) {
    const Decision scaled = classify_src(g, c * y);
    CHECK(scaled.label == base.label);
    CHECK(scaled.solution.iters == base.solution.iters);
  }
}

TEST_CASE("classify_src: non-convergence still classifies, flagged") {
  SynthSpec spec;
  spec.n_classes = 2;
  spec.subspace_dim = 3;
  spec.images_per_class = 5;
  spec.ambient_dim = 50;
  spec.seed = 48;
  spec.tests_per_class = 1;
  const auto [g, ts] = synth_gallery(spec);
  SolverConfig cfg;
  cfg.max_iters = 3;
  const Decision d = classify_src(g, ts.y.col(0), cfg);
  CHECK_FALSE(d.converged);
  REQUIRE(d.residuals.size() == 2);
  CHECK(d.residuals.allFinite());
  CHECK((d.label == 0 || d.label == 1));
}

TEST_CASE("classify_src: zero image ties break to the lowest class id") {
  SynthSpec spec;
  spec.n_classes = 3;
  spec.subspace_dim = 2;
  spec.images_per_class = 3;
  spec.ambient_dim = 20;
  spec.seed = 49;
  spec.tests_per_class = 1;
  const Gallery g = synth_gallery(spec).first;
  const Decision d = classify_src(g, Vec::Zero(20));
  CHECK(d.label == 0);
  CHECK(d.residuals.maxCoeff() <= 1e-12);
}

// --- classify_l2_plain ------------------------------------------------------

TEST_CASE("classify_l2_plain: orthogonal subspaces recover exactly") {
  const Gallery g = orthogonal_gallery(4, 6, 51);
  const Vec y = g.a.col(g.range_of(1).start);
  const Decision d = classify_l2_plain(g, y);
  CHECK(d.label == 1);
  CHECK(d.residuals(1) <= 1e-8);
  // min-norm coefficients live on the true class only
  for (const ClassRange& r : g.class_ranges)
    if (r.class_id != 1)
      CHECK(d.solution.x.segment(r.start, r.count).cwiseAbs().maxCoeff() <=
            1e-10);
}

TEST_CASE("classify_l2_plain: y orthogonal to range(A) ties to class 0") {
  const Gallery g = orthogonal_gallery(4, 6, 52);
  Rng rng(53);
  Vec v = gaussian_mat(24, 1, rng);
  // strip every gallery direction; rank 6 by construction
  const Mat u = svd(g.a).u.leftCols(6);
  const Vec y = v - u * (u.transpose() * v);

  const Decision d = classify_l2_plain(g, y);
  CHECK(d.solution.x.norm() <= 1e-10);
  CHECK(d.label == 0);
  for (Index i = 0; i < 3; ++i)
    CHECK(d.residuals(i) == doctest::Approx(y.norm()).epsilon(1e-10));
}

TEST_CASE("classify_l2_plain: single class") {
  SynthSpec spec;
  spec.n_classes = 1;
  spec.subspace_dim = 2;
  spec.images_per_class = 3;
  spec.ambient_dim = 12;
  spec.seed = 54;
  spec.tests_per_class = 1;
  const auto [g, ts] = synth_gallery(spec);
  CHECK(classify_l2_plain(g, ts.y.col(0)).label == 0);
}

TEST_CASE("classify_l2_plain: matches the bare least-squares formula bitwise") {
  const Gallery g = orthogonal_gallery(4, 6, 55);
  Rng rng(56);
  const Vec y = gaussian_mat(24, 1, rng);
  const Decision d = classify_l2_plain(g, y);

  const Vec x = min_norm_lsq(g.a, y);
  CHECK(d.solution.x == x);
  for (const ClassRange& r : g.class_ranges)
    CHECK(d.residuals(r.class_id) ==
          (y - g.a.middleCols(r.start, r.count) * x.segment(r.start, r.count))
              .norm());
}

// --- classify_l2_occlusion --------------------------------------------------

TEST_CASE("classify_l2_occlusion: input validation") {
  const Gallery g = orthogonal_gallery(4, 6, 57);
  const Vec y = g.a.col(0);
  OcclusionBasis empty;
  empty.w = Mat(24, 0);
  CHECK_THROWS_AS(classify_l2_occlusion(g, empty, y), std::invalid_argument);
  const OcclusionBasis wrong = build_occlusion_basis(5, 5, 2, 2);
  CHECK_THROWS_AS(classify_l2_occlusion(g, wrong, y), std::invalid_argument);
}

TEST_CASE("classify_l2_occlusion: no occlusion matches the plain label") {
  const Gallery g = orthogonal_gallery(4, 6, 58);
  const OcclusionBasis w = build_occlusion_basis(4, 6, 2, 3);
  for (int c = 0; c < 3; ++c) {
    const Vec y = g.a.col(g.range_of(c).start + 1);
    CHECK(classify_l2_occlusion(g, w, y).label ==
          classify_l2_plain(g, y).label);
  }
}

TEST_CASE("classify_l2_occlusion: W absorbs a one-block occlusion exactly") {
  const Gallery g = orthogonal_gallery(4, 6, 59);
  const OcclusionBasis w = build_occlusion_basis(4, 6, 2, 3);
  const Vec y = g.a.col(g.range_of(2).start);
  const Vec occluded = y + 1.6 * w.w.col(4);  // constant bump on one tile

  const Decision d = classify_l2_occlusion(g, w, occluded);
  CHECK(d.label == 2);
  // the system is consistent, so the full fit is exact
  CHECK((occluded - g.a * d.solution.x - d.solution.e).norm() <= 1e-6);
}

TEST_CASE("classify_l2_occlusion: grid (1,1) adds only the mean column") {
  // frame built orthogonal to the all-ones direction, so the single flat
  // basis column is inert and the decision must match the plain method
  const Gallery g = orthogonal_gallery(4, 6, 60, /*zero_mean=*/true);
  const OcclusionBasis w = build_occlusion_basis(4, 6, 1, 1);
  Rng rng(61);
  Vec y = gaussian_mat(24, 1, rng);
  y.array() -= y.mean();

  const Decision with_w = classify_l2_occlusion(g, w, y);
  const Decision plain = classify_l2_plain(g, y);
  CHECK(with_w.label == plain.label);
  CHECK((with_w.residuals - plain.residuals).cwiseAbs().maxCoeff() <= 1e-10);
}

// --- dispatcher -------------------------------------------------------------

TEST_CASE("classify: Method variants route to the right pipeline") {
  const Gallery g = orthogonal_gallery(4, 6, 62);
  const Vec y = g.a.col(g.range_of(1).start);

  Method src;
  src.tag = Src{};
  CHECK(classify(g, src, y).label == classify_src(g, y).label);

  Method plain;
  plain.tag = L2Plain{};
  CHECK(classify(g, plain, y).residuals ==
        classify_l2_plain(g, y).residuals);

  Method occ;
  occ.tag = L2Occlusion{build_occlusion_basis(4, 6, 2, 3)};
  CHECK(classify(g, occ, y).residuals ==
        classify_l2_occlusion(g, std::get<L2Occlusion>(occ.tag).basis, y)
            .residuals);
}
