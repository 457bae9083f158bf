#pragma once

#include "srcbench/gallery.hpp"
#include "srcbench/solvers.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace srcbench {

struct RpcaResult {
  Mat l;
  Mat s;
  int iters = 0;
  bool converged = false;
};

// Principal component pursuit: minimize ||L||_* + lambda ||S||_1 subject to
// D = L + S, by inexact augmented-Lagrangian iteration (singular value
// thresholding on L, entrywise soft-thresholding on S, geometric mu growth).
// lambda defaults to 1/sqrt(max(rows, cols)); cfg.tol_primal is the relative
// Frobenius feasibility stop. Non-convergence is flagged, never thrown.
RpcaResult rpca(const Mat& d, std::optional<double> lambda = {},
                const SolverConfig& cfg = {});

enum class SpectrumMode { PlainSvd, RobustRpca };

// PerClass treats each class block separately (low-dimensional structure is
// a within-subject claim); WholeDatabase runs one decomposition on all of A.
enum class SpectrumScope { PerClass, WholeDatabase };

struct SpectrumReport {
  // One nonincreasing singular-value sequence per subject, in class order.
  std::vector<Vec> per_subject_sigmas;
  // Index-wise mean over subjects, truncated to the shortest sequence.
  // Subjects whose decomposition did not converge are excluded.
  Vec mean_sigmas;
  SpectrumMode mode = SpectrumMode::PlainSvd;
  std::vector<int> non_converged_classes;
};

// PlainSvd: spectrum of each class's column block. RobustRpca: spectrum of
// the low-rank part of rpca on each block.
SpectrumReport spectrum(const Gallery& g, SpectrumMode mode,
                        const SolverConfig& cfg = {},
                        SpectrumScope scope = SpectrumScope::PerClass);

// Count of sigma_i >= rel_tol * sigma_1; an all-zero spectrum has rank 0.
// Requires a nonempty nonincreasing nonnegative sequence.
Index numerical_rank(const Vec& sigmas, double rel_tol = 1e-3);

// CSV `index,mean_sigma,mode` with 1-based index (sigma_1 first) and mode
// spelled as the CLI does: "svd" or "rpca".
void write_spectrum_csv(const std::filesystem::path& file,
                        const SpectrumReport& report);

}  // namespace srcbench
