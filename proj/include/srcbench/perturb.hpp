#pragma once

#include "srcbench/numcore.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

namespace srcbench {

struct PixelCorruption {
  double fraction = 0.0;
};

struct BlockOcclusion {
  double fraction = 0.0;
};

struct Projection {
  Index d = 1;
  // Escape hatch for invariance tests: emit the exact identity (requires
  // d = pixel count) instead of a random matrix.
  bool identity = false;
};

struct UniformNoise {};
struct Texture {
  std::filesystem::path path;
};
using FillMode = std::variant<UniformNoise, Texture>;

struct Perturbation {
  std::variant<PixelCorruption, BlockOcclusion, Projection> kind =
      PixelCorruption{};
  std::uint64_t seed = 0;
  FillMode fill = UniformNoise{};
};

struct PerturbedImage {
  Vec y;
  // Altered pixel indices, sorted ascending; empty for Projection.
  std::vector<Index> true_support;
  // The projection matrix, present only for Projection (y is then phi * input).
  std::optional<Mat> phi;
};

// Replaces exactly round(fraction * len(y)) entries, chosen uniformly
// without replacement, by independent uniform draws on [0, max(y)].
PerturbedImage corrupt_pixels(const Vec& y, double fraction, Rng& rng);

// Covers a square block of side round(sqrt(fraction * h * w)), clamped to
// the image and placed uniformly at random fully inside it, with noise draws
// on [0, max(y)] or tiled texture pixels.
PerturbedImage occlude_block(const Vec& y, Index height, Index width,
                             double fraction, const FillMode& fill, Rng& rng);

// d x m with i.i.d. Gaussian entries of variance 1/d. With identity set,
// returns the exact m x m identity (requires d = m).
Mat gaussian_projection(Index m, Index d, Rng& rng, bool identity = false);

// Dispatch on p.kind with Rng(p.seed). Projection output is phi * y.
PerturbedImage apply_perturbation(const Perturbation& p, const Vec& y,
                                  Index height, Index width);

}  // namespace srcbench
