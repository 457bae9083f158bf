#include "srcbench/numcore.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace srcbench {

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::mix(std::span<const std::uint64_t> parts) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t p : parts) {
    h ^= p;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    h ^= h >> 31;
  }
  return h;
}

Mat gaussian_mat(Index rows, Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  return m;
}

SvdFactors svd(const Mat& m) {
  if (!m.allFinite()) throw std::invalid_argument("svd: non-finite input");
  Eigen::BDCSVD<Mat> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success)
    throw std::runtime_error("svd: decomposition did not converge");

  SvdFactors f;
  f.u = dec.matrixU();
  f.sigma = dec.singularValues();
  f.vt = dec.matrixV().transpose();

  // Fix signs: first nonzero entry of each left singular vector >= 0.
  for (Index j = 0; j < f.u.cols(); ++j) {
    for (Index i = 0; i < f.u.rows(); ++i) {
      if (f.u(i, j) != 0.0) {
        if (f.u(i, j) < 0.0) {
          f.u.col(j) = -f.u.col(j);
          f.vt.row(j) = -f.vt.row(j);
        }
        break;
      }
    }
  }
  return f;
}

Vec soft_threshold(const Vec& v, double tau) {
  if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau < 0");
  return v.array().sign() * (v.array().abs() - tau).max(0.0);
}

Mat soft_threshold(const Mat& m, double tau) {
  if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau < 0");
  return m.array().sign() * (m.array().abs() - tau).max(0.0);
}

Vec shrink_l2(const Vec& v, double tau) {
  if (tau < 0.0) throw std::invalid_argument("shrink_l2: tau < 0");
  const double n = v.norm();
  if (n <= tau) return Vec::Zero(v.size());
  return (1.0 - tau / n) * v;
}

Mat svt(const Mat& m, double tau) {
  if (tau < 0.0) throw std::invalid_argument("svt: tau < 0");
  SvdFactors f = svd(m);
  const Vec s = soft_threshold(f.sigma, tau);
  return f.u * s.asDiagonal() * f.vt;
}

Vec min_norm_lsq(const Mat& a, const Vec& y, double rank_tol) {
  if (a.rows() != y.size())
    throw std::invalid_argument("min_norm_lsq: a.rows() != len(y)");
  SvdFactors f = svd(a);
  const double smax = f.sigma.size() > 0 ? f.sigma(0) : 0.0;
  Vec x = Vec::Zero(a.cols());
  if (smax == 0.0) return x;
  const double cutoff = rank_tol * smax;
  for (Index i = 0; i < f.sigma.size(); ++i) {
    if (f.sigma(i) > cutoff)
      x += f.vt.row(i).transpose() * (f.u.col(i).dot(y) / f.sigma(i));
  }
  return x;
}

}  // namespace srcbench
