#pragma once

#include "srcbench/numcore.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace srcbench {

struct ClassRange {
  int class_id = 0;   // dense 0-based id in sorted-name order
  std::string name;   // directory name for loaded data, digits for synthetic
  Index start = 0;    // first column of this class in the dictionary
  Index count = 0;
};

// The training dictionary A = [A_1 | ... | A_k]. Columns are l2-normalized
// images in [0,1] intensity units, stacked column-major: pixel (r, c) of an
// h x w image sits at index c*h + r.
struct Gallery {
  Mat a;
  std::vector<ClassRange> class_ranges;
  Index height = 0;
  Index width = 0;

  Index pixels() const { return height * width; }
  const ClassRange& range_of(int class_id) const;
};

// Held-out test images with ground-truth labels. Columns are raw (never
// normalized) so error magnitudes stay in pixel units.
struct TestSet {
  Mat y;
  std::vector<int> labels;
};

// W of the occlusion-aware program: one nonnegative unit column per
// rectangular tile of a grid partition of the image.
struct OcclusionBasis {
  Mat w;
  Index grid_rows = 0;
  Index grid_cols = 0;
};

struct SynthSpec {
  int n_classes = 10;
  int subspace_dim = 5;
  int images_per_class = 10;
  int ambient_dim = 500;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  // Held-out images drawn per class; the spec'd field list stops at the
  // training quantities, so the test-set size lives here.
  int tests_per_class = 10;
  // Correlation between class subspaces, in [0, 1): each class basis comes
  // from the QR of sqrt(overlap)·G_shared + sqrt(1-overlap)·G_class, both
  // seeded Gaussian. 0 keeps classes independent; values near 1 mimic the
  // strong inter-class similarity of face galleries, which is what makes
  // the l2 baselines degrade under corruption the way real galleries do.
  double class_overlap = 0.0;
};

// --- image primitives -------------------------------------------------------

// 8-bit grayscale PGM (P5/P2) or PNG; values scaled to [0,1]. Throws
// std::runtime_error naming the path on any format problem.
Mat load_image(const std::filesystem::path& file);
void write_pgm(const std::filesystem::path& file, const Mat& img);
void write_png(const std::filesystem::path& file, const Mat& img);

// Bilinear interpolation with half-pixel centers; no antialias pre-filter.
Mat bilinear_resize(const Mat& img, Index out_h, Index out_w);

// --- gallery construction ---------------------------------------------------

// Directory layout root/<class>/<image>.(pgm|png). Classes and files are
// taken in lexicographically sorted order so loading is independent of
// filesystem enumeration order.
Gallery load_gallery(const std::filesystem::path& root,
                     std::optional<std::pair<Index, Index>> resize_to = {});

// Test images from the same directory layout, loaded without normalization.
TestSet load_test_set(const std::filesystem::path& root, const Gallery& g,
                      std::optional<std::pair<Index, Index>> resize_to = {});

// Per class: orthonormal subspace basis via QR of seeded Gaussian, training
// columns basis * coeffs + noise, l2-normalized. Deterministic given seed.
std::pair<Gallery, TestSet> synth_gallery(const SynthSpec& spec);

// Writes train/<class>/NNN.pgm and test/<class>/NNN.pgm under root, each
// image min-max rescaled to the 8-bit range.
void write_gallery(const std::filesystem::path& root, const Gallery& g,
                   const TestSet& tests);

OcclusionBasis build_occlusion_basis(Index height, Index width,
                                     Index grid_rows, Index grid_cols);

// The contiguous slice of x belonging to class_id's columns.
Vec class_subvector(const Gallery& g, const Vec& x, int class_id);

}  // namespace srcbench
