#pragma once

#include "srcbench/classify.hpp"
#include "srcbench/perturb.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace srcbench {

using GallerySource = std::variant<SynthSpec, std::filesystem::path>;

struct ExperimentSpec {
  GallerySource gallery_source = SynthSpec{};
  std::vector<Method> methods;
  // Grid seeds are ignored: the harness derives one seed per
  // (level, image, trial) from `seed`, with the method excluded, so methods
  // are always compared on identical perturbed inputs.
  std::vector<Perturbation> perturbation_grid;
  int trials_per_level = 1;
  std::uint64_t seed = 0;
};

struct ReportRow {
  std::string method;
  double level = 0.0;
  double rate = 0.0;  // percent
  int n_tests = 0;
  int n_nonconverged = 0;
  double wall_time_s = 0.0;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
};

// Synthesizes, or loads root/train and root/test from disk.
std::pair<Gallery, TestSet> materialize(const GallerySource& source);

// The numeric x-axis value of a grid entry: the fraction for corruption and
// occlusion, the target dimension for projection.
double perturbation_level(const Perturbation& p);

// The seed a harness run gives perturbation (level_idx, image_idx, trial).
// Methods never enter the derivation, so external checks can reproduce the
// exact input every method saw.
std::uint64_t item_seed(std::uint64_t spec_seed, int level_idx,
                        Index image_idx, int trial);

// The projection matrix run_projected_comparison(spec, d) uses, derived from
// spec.seed alone (the exact identity when d equals the pixel count).
Mat comparison_projection(const Gallery& g, std::uint64_t spec_seed, Index d);

// Breakdown curves: for every (method, level) classify each perturbed test
// image (trials_per_level independent perturbations per image). Rows are
// method-major in spec order. Projection entries are rejected here; they
// belong to run_projected_comparison. `parallel` fans images out across
// threads; reports are identical either way.
ExperimentReport run_breakdown(const ExperimentSpec& spec,
                               bool parallel = false);

// The random-projection comparison: full-dimension SRC against both
// projected-feature SRC variants (error in the image domain vs. in the
// feature domain), plus every l2 method from spec.methods on the projected
// features. One Gaussian projection (seeded from spec.seed) is shared by
// the whole experiment; d equal to the pixel count uses the exact identity.
ExperimentReport run_projected_comparison(const ExperimentSpec& spec, Index d,
                                          bool parallel = false);

// Header `method,level,rate,n_tests,n_nonconverged,wall_time_s`, '\n'
// newlines, locale-independent shortest round-trip numbers.
void emit_csv(const ExperimentReport& report,
              const std::filesystem::path& path);
ExperimentReport parse_csv(const std::filesystem::path& path);

// Self-contained SVG line chart, one polyline per method, x = level,
// y = rate; byte-deterministic given the report.
void emit_plot(const ExperimentReport& report,
               const std::filesystem::path& path);

// Wall time is the one nondeterministic report field; zero it before
// byte-comparing CSVs against frozen references.
void zero_wall_times(ExperimentReport& report);

}  // namespace srcbench
