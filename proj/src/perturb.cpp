#include "srcbench/perturb.hpp"

#include "srcbench/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srcbench {

namespace {

// Uniform integer on [0, n); 53-bit draw keeps the floor bias negligible.
Index uniform_index(Rng& rng, Index n) {
  return static_cast<Index>(rng.uniform() * static_cast<double>(n));
}

// First k entries of a uniform random permutation of 0..n-1 (partial
// Fisher-Yates), returned sorted.
std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i)
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(i + uniform_index(rng, n - i))]);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

PerturbedImage corrupt_pixels(const Vec& y, double fraction, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("corrupt_pixels: fraction outside [0,1]");
  PerturbedImage out;
  out.y = y;
  const Index k = static_cast<Index>(
      std::llround(fraction * static_cast<double>(y.size())));
  if (k == 0) return out;
  out.true_support = sample_without_replacement(y.size(), k, rng);
  const double hi = y.maxCoeff();
  for (Index i : out.true_support) out.y(i) = rng.uniform() * hi;
  return out;
}

PerturbedImage occlude_block(const Vec& y, Index height, Index width,
                             double fraction, const FillMode& fill, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("occlude_block: fraction outside [0,1]");
  if (height * width != y.size())
    throw std::invalid_argument("occlude_block: shape does not match y");
  PerturbedImage out;
  out.y = y;
  const Index side = std::min(
      {static_cast<Index>(std::llround(
           std::sqrt(fraction * static_cast<double>(height * width)))),
       height, width});
  if (side == 0) return out;
  const Index r0 = uniform_index(rng, height - side + 1);
  const Index c0 = uniform_index(rng, width - side + 1);

  const bool textured = std::holds_alternative<Texture>(fill);
  Mat tex;
  if (textured) tex = load_image(std::get<Texture>(fill).path);
  const double hi = y.maxCoeff();

  out.true_support.reserve(static_cast<std::size_t>(side * side));
  for (Index c = c0; c < c0 + side; ++c)
    for (Index r = r0; r < r0 + side; ++r) {
      const Index i = c * height + r;
      out.true_support.push_back(i);
      out.y(i) = textured ? tex((r - r0) % tex.rows(), (c - c0) % tex.cols())
                          : rng.uniform() * hi;
    }
  std::sort(out.true_support.begin(), out.true_support.end());
  return out;
}

Mat gaussian_projection(Index m, Index d, Rng& rng, bool identity) {
  if (d < 1 || d > m)
    throw std::invalid_argument("gaussian_projection: need 1 <= d <= m");
  if (identity) {
    if (d != m)
      throw std::invalid_argument(
          "gaussian_projection: identity override requires d = m");
    return Mat::Identity(m, m);
  }
  return gaussian_mat(d, m, rng) / std::sqrt(static_cast<double>(d));
}

PerturbedImage apply_perturbation(const Perturbation& p, const Vec& y,
                                  Index height, Index width) {
  Rng rng(p.seed);
  if (const auto* c = std::get_if<PixelCorruption>(&p.kind))
    return corrupt_pixels(y, c->fraction, rng);
  if (const auto* b = std::get_if<BlockOcclusion>(&p.kind))
    return occlude_block(y, height, width, b->fraction, p.fill, rng);
  const auto& proj = std::get<Projection>(p.kind);
  PerturbedImage out;
  out.phi = gaussian_projection(y.size(), proj.d, rng, proj.identity);
  out.y = *out.phi * y;
  return out;
}

}  // namespace srcbench
