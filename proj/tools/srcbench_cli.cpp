#include "srcbench/bench.hpp"
#include "srcbench/rpca.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace srcbench;

namespace {

// Exit codes: 0 success, 1 input error (bad flags, unreadable or malformed
// inputs), 2 internal failure while computing or writing results.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- shared option blocks ---------------------------------------------------

struct SourceOpts {
  std::string gallery_dir;  // empty -> synthesize
  int classes = 10;
  int subspace_dim = 5;
  int images_per_class = 10;
  int ambient_dim = 500;
  double noise_sigma = 0.0;
  int tests_per_class = 10;
  double overlap = 0.0;
  std::string resize;               // "HxW"
  std::vector<int> train_indices;   // 1-based per-class selection
};

void add_source_opts(CLI::App* cmd, SourceOpts& s) {
  cmd->add_option("--gallery", s.gallery_dir,
                  "gallery directory with train/ and test/ subtrees "
                  "(omit to use a synthetic gallery)");
  cmd->add_option("--classes", s.classes, "synthetic: number of classes");
  cmd->add_option("--subspace-dim", s.subspace_dim,
                  "synthetic: subspace dimension per class");
  cmd->add_option("--images-per-class", s.images_per_class,
                  "synthetic: training images per class");
  cmd->add_option("--ambient-dim", s.ambient_dim,
                  "synthetic: pixels per image");
  cmd->add_option("--noise-sigma", s.noise_sigma,
                  "synthetic: dense Gaussian noise level");
  cmd->add_option("--tests-per-class", s.tests_per_class,
                  "synthetic: held-out images per class");
  cmd->add_option("--overlap", s.overlap,
                  "synthetic: class subspace correlation in [0,1)");
  cmd->add_option("--resize", s.resize,
                  "resize loaded images to HxW, e.g. 96x84");
  cmd->add_option("--train-indices", s.train_indices,
                  "1-based image indices kept per class (sorted filename "
                  "order), e.g. 1,3,5,6,7")
      ->delimiter(',');
}

std::optional<std::pair<Index, Index>> parse_resize(const std::string& s) {
  if (s.empty()) return {};
  long h = 0, w = 0;
  char x = 0;
  if (std::sscanf(s.c_str(), "%ld%c%ld", &h, &x, &w) != 3 || x != 'x' ||
      h <= 0 || w <= 0)
    throw InputError("--resize expects HxW, got '" + s + "'");
  return std::make_pair(static_cast<Index>(h), static_cast<Index>(w));
}

SynthSpec synth_of(const SourceOpts& s, std::uint64_t seed) {
  SynthSpec sy;
  sy.n_classes = s.classes;
  sy.subspace_dim = s.subspace_dim;
  sy.images_per_class = s.images_per_class;
  sy.ambient_dim = s.ambient_dim;
  sy.noise_sigma = s.noise_sigma;
  sy.seed = seed;
  sy.tests_per_class = s.tests_per_class;
  sy.class_overlap = s.overlap;
  return sy;
}

// Keeps the listed 1-based images of every class, the AR-style protocol
// selection.
Gallery subset_gallery(const Gallery& g, const std::vector<int>& indices) {
  for (int i : indices)
    if (i < 1)
      throw InputError("--train-indices are 1-based, got " +
                       std::to_string(i));
  Gallery out;
  out.height = g.height;
  out.width = g.width;
  out.a.resize(g.a.rows(),
               static_cast<Index>(indices.size() * g.class_ranges.size()));
  Index col = 0;
  for (const ClassRange& r : g.class_ranges) {
    ClassRange nr;
    nr.class_id = r.class_id;
    nr.name = r.name;
    nr.start = col;
    nr.count = static_cast<Index>(indices.size());
    for (int i : indices) {
      if (i > r.count)
        throw InputError("--train-indices: class " + r.name + " has only " +
                         std::to_string(r.count) + " images");
      out.a.col(col++) = g.a.col(r.start + i - 1);
    }
    out.class_ranges.push_back(std::move(nr));
  }
  return out;
}

std::pair<Gallery, TestSet> build_source(const SourceOpts& s,
                                         std::uint64_t seed) {
  if (s.gallery_dir.empty()) {
    if (!s.train_indices.empty())
      throw InputError("--train-indices requires --gallery");
    return synth_gallery(synth_of(s, seed));
  }
  const auto resize = parse_resize(s.resize);
  const fs::path root = s.gallery_dir;
  Gallery g = load_gallery(root / "train", resize);
  if (!s.train_indices.empty()) g = subset_gallery(g, s.train_indices);
  TestSet tests;
  if (fs::exists(root / "test")) tests = load_test_set(root / "test", g, resize);
  return {std::move(g), std::move(tests)};
}

struct PerturbOpts {
  double corrupt = -1.0;
  double occlude = -1.0;
  std::string fill = "noise";
};

void add_perturb_opts(CLI::App* cmd, PerturbOpts& p) {
  cmd->add_option("--corrupt", p.corrupt,
                  "replace this fraction of pixels with uniform noise");
  cmd->add_option("--occlude", p.occlude,
                  "cover a block of this area fraction");
  cmd->add_option("--fill", p.fill,
                  "occlusion fill: 'noise' or 'texture:PATH'");
}

FillMode parse_fill(const std::string& s) {
  if (s == "noise") return UniformNoise{};
  if (s.rfind("texture:", 0) == 0) return Texture{s.substr(8)};
  throw InputError("--fill expects 'noise' or 'texture:PATH', got '" + s +
                   "'");
}

std::optional<Perturbation> single_perturbation(const PerturbOpts& p) {
  if (p.corrupt >= 0.0 && p.occlude >= 0.0)
    throw InputError("--corrupt and --occlude are mutually exclusive");
  if (p.corrupt >= 0.0)
    return Perturbation{PixelCorruption{p.corrupt}, 0, parse_fill(p.fill)};
  if (p.occlude >= 0.0)
    return Perturbation{BlockOcclusion{p.occlude}, 0, parse_fill(p.fill)};
  return {};
}

// Levels from "A:B:S" (inclusive range) or a comma list; a bare number is a
// single level.
std::vector<Perturbation> build_grid(const std::string& grid,
                                     const std::string& kind,
                                     const FillMode& fill) {
  std::vector<double> levels;
  if (grid.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
        step <= 0 || b < a)
      throw InputError("--grid expects START:STOP:STEP, got '" + grid + "'");
    for (double v = a; v <= b + 1e-9; v += step) levels.push_back(v);
  } else {
    std::size_t start = 0;
    while (start <= grid.size()) {
      const std::size_t comma = grid.find(',', start);
      const std::string tok =
          grid.substr(start, comma == std::string::npos ? comma : comma - start);
      try {
        levels.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw InputError("--grid: bad level '" + tok + "'");
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (levels.empty()) throw InputError("--grid produced no levels");
  std::vector<Perturbation> out;
  for (double v : levels) {
    if (kind == "corrupt")
      out.push_back({PixelCorruption{v}, 0, fill});
    else if (kind == "occlude")
      out.push_back({BlockOcclusion{v}, 0, fill});
    else
      throw InputError("--kind expects corrupt|occlude, got '" + kind + "'");
  }
  return out;
}

std::vector<Method> build_methods(const std::vector<std::string>& names,
                                  const SolverConfig& cfg, const Gallery& g,
                                  std::pair<int, int> w_grid) {
  std::vector<Method> out;
  for (const std::string& n : names) {
    if (n == "src")
      out.push_back({Src{}, cfg});
    else if (n == "l2")
      out.push_back({L2Plain{}, cfg});
    else if (n == "l2w")
      out.push_back({L2Occlusion{build_occlusion_basis(
                        g.height, g.width,
                        std::min<Index>(w_grid.first, g.height),
                        std::min<Index>(w_grid.second, g.width))},
                     cfg});
    else
      throw InputError("--methods expects src|l2|l2w, got '" + n + "'");
  }
  return out;
}

// Touch output files up front so unwritable paths surface as input errors.
void ensure_writable(const std::string& path) {
  if (path.empty()) return;
  std::ofstream probe(path, std::ios::app);
  if (!probe) throw InputError("cannot write to " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sparse-representation classification benchmarks: synthetic galleries, "
      "robust spectra, and corruption/occlusion breakdown curves"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "flat key=value file mirroring all flags (subcommand flags "
                 "as 'subcommand.flag=value'); command-line flags win");

  std::uint64_t seed = 0;
  std::string out_path;
  app.add_option("--seed", seed, "experiment seed");
  app.add_option("--out", out_path, "output file path");

  // synth ---------------------------------------------------------------
  SourceOpts synth_src;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "write a synthetic gallery to disk");
  add_source_opts(synth_cmd, synth_src);

  // spectrum ------------------------------------------------------------
  SourceOpts spec_src;
  std::string spec_mode = "svd";
  std::string spec_scope = "class";
  int spec_max_iters = 2000;
  CLI::App* spec_cmd = app.add_subcommand(
      "spectrum", "per-class singular value spectra, plain or robust");
  add_source_opts(spec_cmd, spec_src);
  spec_cmd->add_option("--mode", spec_mode, "svd|rpca");
  spec_cmd->add_option("--scope", spec_scope, "class|database");
  spec_cmd->add_option("--max-iters", spec_max_iters, "rpca iteration budget");

  // rpca ----------------------------------------------------------------
  SourceOpts rpca_src;
  double rpca_lambda = -1.0;
  std::string rpca_class;
  int rpca_max_iters = 2000;
  CLI::App* rpca_cmd = app.add_subcommand(
      "rpca", "low-rank + sparse decomposition of the training matrix");
  add_source_opts(rpca_cmd, rpca_src);
  rpca_cmd->add_option("--lambda", rpca_lambda,
                       "sparsity weight (default 1/sqrt(max dim))");
  rpca_cmd->add_option("--class", rpca_class,
                       "decompose only this class's block");
  rpca_cmd->add_option("--max-iters", rpca_max_iters, "iteration budget");

  // classify ------------------------------------------------------------
  SourceOpts cls_src;
  PerturbOpts cls_perturb;
  std::string cls_method = "src";
  std::vector<std::string> cls_images;
  int cls_max_iters = 2000;
  long cls_project = 0;
  std::pair<int, int> cls_wgrid{5, 5};
  CLI::App* cls_cmd = app.add_subcommand(
      "classify", "classify test images against the gallery");
  add_source_opts(cls_cmd, cls_src);
  add_perturb_opts(cls_cmd, cls_perturb);
  cls_cmd->add_option("--method", cls_method, "src|l2|l2w");
  cls_cmd->add_option("--image", cls_images,
                      "image file(s) to classify (default: the gallery's "
                      "test set)");
  cls_cmd->add_option("--max-iters", cls_max_iters, "solver budget");
  cls_cmd->add_option("--project", cls_project,
                      "classify in d random projected features");
  cls_cmd->add_option("--w-grid", cls_wgrid,
                      "occlusion basis grid for l2w, e.g. 5 5");

  // breakdown -----------------------------------------------------------
  SourceOpts bd_src;
  std::string bd_grid = "0:0.9:0.1";
  std::string bd_kind = "corrupt";
  std::string bd_fill = "noise";
  std::vector<std::string> bd_methods = {"src", "l2", "l2w"};
  int bd_trials = 1;
  int bd_max_iters = 2000;
  bool bd_parallel = false;
  std::string bd_plot;
  std::pair<int, int> bd_wgrid{5, 5};
  CLI::App* bd_cmd = app.add_subcommand(
      "breakdown", "recognition-rate curves over a perturbation grid");
  add_source_opts(bd_cmd, bd_src);
  bd_cmd->add_option("--grid", bd_grid, "levels as START:STOP:STEP or a,b,c");
  bd_cmd->add_option("--kind", bd_kind, "corrupt|occlude");
  bd_cmd->add_option("--fill", bd_fill, "'noise' or 'texture:PATH'");
  bd_cmd->add_option("--methods", bd_methods, "subset of src,l2,l2w")
      ->delimiter(',');
  bd_cmd->add_option("--trials", bd_trials, "perturbation draws per image");
  bd_cmd->add_option("--max-iters", bd_max_iters, "solver budget");
  bd_cmd->add_flag("--parallel", bd_parallel, "fan images out across threads");
  bd_cmd->add_option("--plot", bd_plot, "also write an SVG chart here");
  bd_cmd->add_option("--w-grid", bd_wgrid, "l2w occlusion basis grid");

  // project -------------------------------------------------------------
  SourceOpts pj_src;
  long pj_d = 0;
  std::string pj_grid = "0.3";
  std::string pj_kind = "occlude";
  std::string pj_fill = "noise";
  int pj_trials = 1;
  int pj_max_iters = 2000;
  bool pj_parallel = false;
  std::string pj_plot;
  CLI::App* pj_cmd = app.add_subcommand(
      "project", "full-dimension vs projected-feature comparison");
  add_source_opts(pj_cmd, pj_src);
  pj_cmd->add_option("-d,--dim", pj_d, "projected feature dimension")
      ->required();
  pj_cmd->add_option("--grid", pj_grid, "levels as START:STOP:STEP or a,b,c");
  pj_cmd->add_option("--kind", pj_kind, "corrupt|occlude");
  pj_cmd->add_option("--fill", pj_fill, "'noise' or 'texture:PATH'");
  pj_cmd->add_option("--trials", pj_trials, "perturbation draws per image");
  pj_cmd->add_option("--max-iters", pj_max_iters, "solver budget");
  pj_cmd->add_flag("--parallel", pj_parallel, "fan images out across threads");
  pj_cmd->add_option("--plot", pj_plot, "also write an SVG chart here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  // Phase 1: load and validate all inputs. Failures here are input errors.
  int phase = 1;
  try {
    if (synth_cmd->parsed()) {
      if (out_path.empty()) throw InputError("synth requires --out DIR");
      const auto [g, tests] = synth_gallery(synth_of(synth_src, seed));
      phase = 2;
      write_gallery(out_path, g, tests);
      std::printf("wrote %d classes x %d images to %s\n",
                  static_cast<int>(g.class_ranges.size()),
                  static_cast<int>(g.class_ranges.front().count),
                  out_path.c_str());
      return 0;
    }

    if (spec_cmd->parsed()) {
      if (out_path.empty()) throw InputError("spectrum requires --out FILE");
      if (spec_mode != "svd" && spec_mode != "rpca")
        throw InputError("--mode expects svd|rpca, got '" + spec_mode + "'");
      if (spec_scope != "class" && spec_scope != "database")
        throw InputError("--scope expects class|database, got '" +
                         spec_scope + "'");
      ensure_writable(out_path);
      const auto [g, tests] = build_source(spec_src, seed);
      SolverConfig cfg;
      cfg.max_iters = spec_max_iters;
      phase = 2;
      const SpectrumReport rep =
          spectrum(g,
                   spec_mode == "svd" ? SpectrumMode::PlainSvd
                                      : SpectrumMode::RobustRpca,
                   cfg,
                   spec_scope == "class" ? SpectrumScope::PerClass
                                         : SpectrumScope::WholeDatabase);
      write_spectrum_csv(out_path, rep);
      for (int c : rep.non_converged_classes)
        std::fprintf(stderr, "warning: class %d did not converge\n", c);
      std::printf("wrote %d mean singular values to %s\n",
                  static_cast<int>(rep.mean_sigmas.size()), out_path.c_str());
      return 0;
    }

    if (rpca_cmd->parsed()) {
      const auto [g, tests] = build_source(rpca_src, seed);
      Mat d = g.a;
      if (!rpca_class.empty()) {
        const ClassRange* hit = nullptr;
        for (const ClassRange& r : g.class_ranges)
          if (r.name == rpca_class) hit = &r;
        if (!hit)
          throw InputError("--class '" + rpca_class + "' not in gallery");
        d = g.a.middleCols(hit->start, hit->count);
      }
      std::optional<double> lambda;
      if (rpca_lambda > 0.0) lambda = rpca_lambda;
      SolverConfig cfg;
      cfg.max_iters = rpca_max_iters;
      ensure_writable(out_path);
      phase = 2;
      const RpcaResult res = rpca(d, lambda, cfg);
      const Vec sig = svd(res.l).sigma;
      const Index rank = numerical_rank(sig);
      const Index spikes =
          (res.s.array().abs() > 1e-8).count();
      std::printf("rpca: %lld x %lld, iters=%d converged=%s rank(L)=%lld "
                  "nnz(S)=%lld\n",
                  static_cast<long long>(d.rows()),
                  static_cast<long long>(d.cols()), res.iters,
                  res.converged ? "yes" : "no", static_cast<long long>(rank),
                  static_cast<long long>(spikes));
      if (!out_path.empty()) {
        SpectrumReport rep;
        rep.mode = SpectrumMode::RobustRpca;
        rep.per_subject_sigmas = {sig};
        rep.mean_sigmas = sig;
        write_spectrum_csv(out_path, rep);
        std::printf("wrote spectrum of L to %s\n", out_path.c_str());
      }
      return res.converged ? 0 : 2;
    }

    if (cls_cmd->parsed()) {
      const auto [g, tests] = build_source(cls_src, seed);
      SolverConfig cfg;
      cfg.max_iters = cls_max_iters;
      const std::vector<Method> methods = build_methods(
          {cls_method}, cfg, g, cls_wgrid);
      const auto pert = single_perturbation(cls_perturb);
      if (cls_project < 0 ||
          cls_project > static_cast<long>(g.pixels()))
        throw InputError("--project must lie in [1, pixel count]");

      Mat ys;           // columns to classify
      std::vector<std::string> names;  // per column, for printing
      std::vector<int> truth;          // -1 when unknown
      if (!cls_images.empty()) {
        ys.resize(g.pixels(), static_cast<Index>(cls_images.size()));
        const auto resize = parse_resize(cls_src.resize);
        for (std::size_t i = 0; i < cls_images.size(); ++i) {
          Mat img = load_image(cls_images[i]);
          if (resize) img = bilinear_resize(img, resize->first, resize->second);
          if (img.rows() != g.height || img.cols() != g.width)
            throw InputError(cls_images[i] + ": size " +
                             std::to_string(img.rows()) + "x" +
                             std::to_string(img.cols()) +
                             " does not match the gallery");
          ys.col(static_cast<Index>(i)) =
              Eigen::Map<const Vec>(img.data(), img.size());
          names.push_back(cls_images[i]);
          truth.push_back(-1);
        }
      } else {
        if (tests.y.cols() == 0)
          throw InputError("no test images: pass --image or a gallery with "
                           "a test/ subtree");
        ys = tests.y;
        for (Index i = 0; i < ys.cols(); ++i) {
          names.push_back("test[" + std::to_string(i) + "]");
          truth.push_back(tests.labels[static_cast<std::size_t>(i)]);
        }
      }

      phase = 2;
      Mat phi;
      Mat phi_a;
      if (cls_project > 0) {
        Rng prng(Rng::mix({seed, 0x70726f6a}));
        phi = gaussian_projection(g.pixels(), cls_project, prng,
                                  cls_project == g.pixels());
        phi_a = phi * g.a;
      }

      int correct = 0, known = 0;
      for (Index i = 0; i < ys.cols(); ++i) {
        Vec y = ys.col(i);
        if (pert) {
          Perturbation p = *pert;
          p.seed = Rng::mix({seed, static_cast<std::uint64_t>(i)});
          y = apply_perturbation(p, y, g.height, g.width).y;
        }
        int label;
        if (cls_project > 0) {
          const Vec y_feat = phi * y;
          Vec x;
          if (cls_method == "src") {
            const SparseSolution s = solve_projected(
                g.a, y, phi, ProjectedVariant::ProjectedE, cfg);
            x = s.x;
            Vec r(static_cast<Index>(g.class_ranges.size()));
            for (const ClassRange& cr : g.class_ranges)
              r(cr.class_id) = (y_feat -
                                phi_a.middleCols(cr.start, cr.count) *
                                    x.segment(cr.start, cr.count) -
                                s.e)
                                   .norm();
            label = 0;
            for (Index c = 1; c < r.size(); ++c)
              if (r(c) < r(label) - 1e-12) label = static_cast<int>(c);
          } else {
            // l2 variants on projected features share one least-squares fit
            Mat b = phi_a;
            if (cls_method == "l2w") {
              const auto& basis = std::get<L2Occlusion>(methods[0].tag).basis;
              b.conservativeResize(Eigen::NoChange,
                                   phi_a.cols() + basis.w.cols());
              b.rightCols(basis.w.cols()) = phi * basis.w;
            }
            const Vec z = min_norm_lsq(b, y_feat);
            Vec r(static_cast<Index>(g.class_ranges.size()));
            for (const ClassRange& cr : g.class_ranges)
              r(cr.class_id) = (y_feat -
                                phi_a.middleCols(cr.start, cr.count) *
                                    z.segment(cr.start, cr.count))
                                   .norm();
            label = 0;
            for (Index c = 1; c < r.size(); ++c)
              if (r(c) < r(label) - 1e-12) label = static_cast<int>(c);
          }
        } else {
          label = classify(g, methods[0], y).label;
        }
        const std::string& cls_name = g.range_of(label).name;
        if (truth[static_cast<std::size_t>(i)] >= 0) {
          ++known;
          correct += label == truth[static_cast<std::size_t>(i)];
          std::printf("%s -> %s (truth %s)\n",
                      names[static_cast<std::size_t>(i)].c_str(),
                      cls_name.c_str(),
                      g.range_of(truth[static_cast<std::size_t>(i)])
                          .name.c_str());
        } else {
          std::printf("%s -> %s\n",
                      names[static_cast<std::size_t>(i)].c_str(),
                      cls_name.c_str());
        }
      }
      if (known > 0)
        std::printf("accuracy: %d/%d (%.1f%%)\n", correct, known,
                    100.0 * correct / known);
      return 0;
    }

    if (bd_cmd->parsed() || pj_cmd->parsed()) {
      const bool projected = pj_cmd->parsed();
      const SourceOpts& src = projected ? pj_src : bd_src;
      const std::string& grid = projected ? pj_grid : bd_grid;
      const std::string& kind = projected ? pj_kind : bd_kind;
      const std::string& fill = projected ? pj_fill : bd_fill;
      const std::string& plot = projected ? pj_plot : bd_plot;
      if (out_path.empty())
        throw InputError(std::string(projected ? "project" : "breakdown") +
                         " requires --out FILE");
      ensure_writable(out_path);
      ensure_writable(plot);

      ExperimentSpec spec;
      if (src.gallery_dir.empty()) {
        spec.gallery_source = synth_of(src, seed);
      } else {
        // load eagerly so unreadable trees fail in phase 1
        build_source(src, seed);
        if (!src.resize.empty() || !src.train_indices.empty())
          throw InputError(
              "--resize/--train-indices are not supported for experiment "
              "runs; materialize the gallery with synth/your own copy first");
        spec.gallery_source = fs::path(src.gallery_dir);
      }
      SolverConfig cfg;
      cfg.max_iters = projected ? pj_max_iters : bd_max_iters;
      spec.perturbation_grid = build_grid(grid, kind, parse_fill(fill));
      spec.trials_per_level = projected ? pj_trials : bd_trials;
      spec.seed = seed;

      const auto [g, tests] = build_source(src, seed);
      spec.methods = build_methods(projected
                                       ? std::vector<std::string>{"src", "l2"}
                                       : bd_methods,
                                   cfg, g, bd_wgrid);
      if (projected && (pj_d < 1 || pj_d > static_cast<long>(g.pixels())))
        throw InputError("-d must lie in [1, " + std::to_string(g.pixels()) +
                         "] for this gallery");

      phase = 2;
      const ExperimentReport rep =
          projected
              ? run_projected_comparison(spec, pj_d, pj_parallel)
              : run_breakdown(spec, bd_parallel);
      emit_csv(rep, out_path);
      if (!plot.empty()) emit_plot(rep, plot);
      std::printf("wrote %d rows to %s\n", static_cast<int>(rep.rows.size()),
                  out_path.c_str());
      for (const ReportRow& row : rep.rows)
        if (row.n_nonconverged > 0)
          std::fprintf(stderr,
                       "warning: %s at level %g: %d non-converged solves\n",
                       row.method.c_str(), row.level, row.n_nonconverged);
      return 0;
    }

    throw InputError("no subcommand given");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return phase == 1 ? 1 : 2;
  }
}
