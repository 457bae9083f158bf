#include "srcbench/rpca.hpp"

#include "srcbench/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace srcbench {

RpcaResult rpca(const Mat& d, std::optional<double> lambda,
                const SolverConfig& cfg) {
  if (!d.allFinite()) throw std::invalid_argument("rpca: non-finite input");
  if (lambda && *lambda <= 0.0)
    throw std::invalid_argument("rpca: lambda must be positive");

  RpcaResult res;
  res.l = Mat::Zero(d.rows(), d.cols());
  res.s = Mat::Zero(d.rows(), d.cols());
  const double dnorm = d.norm();
  if (dnorm == 0.0) {
    res.converged = true;
    return res;
  }

  const double lam =
      lambda.value_or(1.0 / std::sqrt(static_cast<double>(
                                std::max(d.rows(), d.cols()))));
  const double sigma1 = svd(d).sigma(0);

  // Dual-scaled start Y = D / max(||D||_2, ||D||_inf / lam) so the first svt
  // pass already sees the right scale.
  const double j0 = std::max(sigma1, d.cwiseAbs().maxCoeff() / lam);
  Mat y = d / j0;

  const double mu0 = cfg.mu0 > 0.0 ? cfg.mu0 : 1.25 / sigma1;
  const double mu_max = mu_schedule::kMaxFactor * mu0;
  double mu = mu0;

  int iters_at_level = 0;
  for (res.iters = 0; res.iters < cfg.max_iters;) {
    const Mat l_next = svt(d - res.s + y / mu, 1.0 / mu);
    const Mat s_next = soft_threshold(Mat(d - l_next + y / mu), lam / mu);
    const Mat resid = d - l_next - s_next;
    y += mu * resid;
    const double change =
        ((l_next - res.l).norm() + (s_next - res.s).norm()) / dnorm;
    res.l = l_next;
    res.s = s_next;
    ++res.iters;
    if (resid.norm() / dnorm <= cfg.tol_primal) {
      res.converged = true;
      break;
    }
    ++iters_at_level;
    if ((mu / mu0) * change < mu_schedule::kGrowThresh ||
        iters_at_level >= mu_schedule::stall_cap(cfg.max_iters)) {
      mu = std::min(mu * cfg.mu_growth, mu_max);
      iters_at_level = 0;
    }
  }
  return res;
}

SpectrumReport spectrum(const Gallery& g, SpectrumMode mode,
                        const SolverConfig& cfg, SpectrumScope scope) {
  if (g.a.cols() == 0) throw std::invalid_argument("spectrum: empty gallery");

  SpectrumReport report;
  report.mode = mode;

  std::vector<std::pair<int, Mat>> blocks;
  if (scope == SpectrumScope::WholeDatabase) {
    blocks.emplace_back(0, g.a);
  } else {
    for (const ClassRange& r : g.class_ranges)
      blocks.emplace_back(r.class_id, g.a.middleCols(r.start, r.count));
  }

  for (const auto& [class_id, block] : blocks) {
    if (mode == SpectrumMode::RobustRpca) {
      const RpcaResult rr = rpca(block, {}, cfg);
      if (!rr.converged) report.non_converged_classes.push_back(class_id);
      report.per_subject_sigmas.push_back(svd(rr.l).sigma);
    } else {
      report.per_subject_sigmas.push_back(svd(block).sigma);
    }
  }

  Index common = std::numeric_limits<Index>::max();
  for (const Vec& s : report.per_subject_sigmas)
    common = std::min(common, s.size());

  const auto excluded = [&](int class_id) {
    return std::find(report.non_converged_classes.begin(),
                     report.non_converged_classes.end(),
                     class_id) != report.non_converged_classes.end();
  };
  Index included = 0;
  Vec sum = Vec::Zero(common);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (excluded(blocks[i].first)) continue;
    sum += report.per_subject_sigmas[i].head(common);
    ++included;
  }
  report.mean_sigmas = included > 0 ? Vec(sum / static_cast<double>(included))
                                    : Vec::Zero(0);
  return report;
}

Index numerical_rank(const Vec& sigmas, double rel_tol) {
  if (sigmas.size() == 0)
    throw std::invalid_argument("numerical_rank: empty spectrum");
  if (sigmas(0) <= 0.0) return 0;
  const double cutoff = rel_tol * sigmas(0);
  Index rank = 0;
  while (rank < sigmas.size() && sigmas(rank) >= cutoff) ++rank;
  return rank;
}

void write_spectrum_csv(const std::filesystem::path& file,
                        const SpectrumReport& report) {
  std::ofstream out(file, std::ios::binary);
  if (!out)
    throw std::runtime_error(file.string() + ": cannot open for writing");
  const char* mode = report.mode == SpectrumMode::PlainSvd ? "svd" : "rpca";
  out << "index,mean_sigma,mode\n";
  for (Index i = 0; i < report.mean_sigmas.size(); ++i)
    out << (i + 1) << "," << format_double(report.mean_sigmas(i)) << ","
        << mode << "\n";
  if (!out) throw std::runtime_error(file.string() + ": write failed");
}

}  // namespace srcbench
