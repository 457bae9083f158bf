#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <span>

namespace srcbench {

// Dense column-major storage throughout. Images are column-stacked:
// pixel (r, c) of an h x w image lives at index c*h + r.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Thin SVD m = u * diag(sigma) * vt, sigma nonincreasing.
// Sign convention: the first nonzero entry of each left singular vector is
// nonnegative, so factors are reproducible across runs.
struct SvdFactors {
  Mat u;
  Vec sigma;
  Mat vt;
};

// Deterministic seeded generator: a splitmix64 stream. Same seed, same
// platform-independent bit stream. normal() uses Box-Muller and consumes
// exactly two uniform draws per call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53 random mantissa bits.
  double uniform();

  // Standard normal via Box-Muller.
  double normal();

  // Child stream decorrelated from this one, derived from the construction
  // seed (not the current state), so derivation order does not matter.
  Rng derive(std::uint64_t stream) const { return Rng(mix({seed_, stream})); }

  std::uint64_t seed() const { return seed_; }

  // Splitmix-style combiner for deriving seeds from (seed, indices...).
  static std::uint64_t mix(std::span<const std::uint64_t> parts);
  static std::uint64_t mix(std::initializer_list<std::uint64_t> parts) {
    return mix(std::span<const std::uint64_t>(parts.begin(), parts.size()));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

// Gaussian(0,1) matrix filled in column-major order from rng.
Mat gaussian_mat(Index rows, Index cols, Rng& rng);

// Thin SVD. Throws std::invalid_argument on non-finite input and
// std::runtime_error if the decomposition does not converge.
SvdFactors svd(const Mat& m);

// Entrywise w_i = sign(v_i) * max(|v_i| - tau, 0); prox of tau*||.||_1.
Vec soft_threshold(const Vec& v, double tau);
Mat soft_threshold(const Mat& m, double tau);

// Block shrinkage max(1 - tau/||v||_2, 0) * v; prox of tau*||.||_2.
Vec shrink_l2(const Vec& v, double tau);

// Singular value thresholding: soft-threshold the spectrum of m.
Mat svt(const Mat& m, double tau);

// Least-squares solution of min ||y - a*x||_2 with minimum l2 norm among all
// minimizers, via rank-truncated pseudoinverse. Singular values below
// rank_tol * sigma_max are treated as zero.
Vec min_norm_lsq(const Mat& a, const Vec& y, double rank_tol = 1e-10);

}  // namespace srcbench
