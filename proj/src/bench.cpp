#include "srcbench/bench.hpp"

#include "srcbench/format.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace srcbench {
namespace {

// Stream tag separating the shared projection draw from per-image seeds.
constexpr std::uint64_t kPhiStream = 0x70726f6a;  // "proj"

std::string base_name(const Method& m) {
  struct V {
    std::string operator()(const Src&) const { return "src"; }
    std::string operator()(const L2Plain&) const { return "l2"; }
    std::string operator()(const L2Occlusion&) const { return "l2w"; }
  };
  return std::visit(V{}, m.tag);
}

// Duplicate tags get _2, _3, ... suffixes so CSV rows stay distinguishable.
std::vector<std::string> method_names(const std::vector<Method>& methods) {
  std::vector<std::string> names;
  names.reserve(methods.size());
  for (const Method& m : methods) {
    std::string name = base_name(m);
    int repeat = 1;
    for (const std::string& prior : names)
      repeat += prior == name || prior.rfind(name + "_", 0) == 0;
    if (repeat > 1) name += "_" + std::to_string(repeat);
    names.push_back(std::move(name));
  }
  return names;
}

// Same argmin rule as the classifiers: ties within 1e-12 go to the lower id.
int argmin_label(const Vec& residuals) {
  int best = 0;
  for (int i = 1; i < residuals.size(); ++i)
    if (residuals(i) < residuals(best) - 1e-12) best = i;
  return best;
}

struct ItemOutcome {
  bool correct = false;
  bool nonconverged = false;
  double seconds = 0.0;
};

// Index-addressed fan-out: each item writes only its own slot, so the
// reduction is independent of scheduling and the parallel report matches
// the serial one (wall times aside, which are measured per item either way).
void for_each_index(Index n, bool parallel,
                    const std::function<void(Index)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      parallel ? static_cast<unsigned>(std::min<Index>(hw, n)) : 1;
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const Index i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          const std::scoped_lock lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void validate_grid(const ExperimentSpec& spec, bool allow_projection) {
  if (spec.perturbation_grid.empty())
    throw std::invalid_argument("experiment: empty perturbation grid");
  if (spec.trials_per_level < 1)
    throw std::invalid_argument("experiment: trials_per_level must be >= 1");
  if (allow_projection) return;
  for (const Perturbation& p : spec.perturbation_grid)
    if (std::holds_alternative<Projection>(p.kind))
      throw std::invalid_argument(
          "experiment: projection levels belong to run_projected_comparison");
}

// Builds the rows from per-item outcomes laid out as
// outcome[(level * items_per_level + item) * n_methods + method].
ExperimentReport reduce_outcomes(const std::vector<ItemOutcome>& outcomes,
                                 const std::vector<std::string>& names,
                                 const std::vector<double>& levels,
                                 Index items_per_level) {
  const int n_methods = static_cast<int>(names.size());
  const int n_levels = static_cast<int>(levels.size());
  ExperimentReport report;
  report.rows.reserve(static_cast<std::size_t>(n_methods) * n_levels);
  for (int mi = 0; mi < n_methods; ++mi) {
    for (int li = 0; li < n_levels; ++li) {
      ReportRow row;
      row.method = names[mi];
      row.level = levels[li];
      row.n_tests = static_cast<int>(items_per_level);
      int correct = 0;
      for (Index item = 0; item < items_per_level; ++item) {
        const ItemOutcome& o =
            outcomes[(li * items_per_level + item) * n_methods + mi];
        correct += o.correct;
        row.n_nonconverged += o.nonconverged;
        row.wall_time_s += o.seconds;
      }
      row.rate = 100.0 * correct / static_cast<double>(row.n_tests);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::vector<double> grid_levels(const std::vector<Perturbation>& grid) {
  std::vector<double> levels;
  levels.reserve(grid.size());
  for (const Perturbation& p : grid) levels.push_back(perturbation_level(p));
  return levels;
}

}  // namespace

std::pair<Gallery, TestSet> materialize(const GallerySource& source) {
  if (const SynthSpec* synth = std::get_if<SynthSpec>(&source))
    return synth_gallery(*synth);
  const auto& root = std::get<std::filesystem::path>(source);
  Gallery g = load_gallery(root / "train");
  TestSet tests = load_test_set(root / "test", g);
  return {std::move(g), std::move(tests)};
}

double perturbation_level(const Perturbation& p) {
  struct V {
    double operator()(const PixelCorruption& c) const { return c.fraction; }
    double operator()(const BlockOcclusion& o) const { return o.fraction; }
    double operator()(const Projection& pr) const {
      return static_cast<double>(pr.d);
    }
  };
  return std::visit(V{}, p.kind);
}

std::uint64_t item_seed(std::uint64_t spec_seed, int level_idx,
                        Index image_idx, int trial) {
  return Rng::mix({spec_seed, static_cast<std::uint64_t>(level_idx),
                   static_cast<std::uint64_t>(image_idx),
                   static_cast<std::uint64_t>(trial)});
}

ExperimentReport run_breakdown(const ExperimentSpec& spec, bool parallel) {
  if (spec.methods.empty())
    throw std::invalid_argument("run_breakdown: no methods");
  validate_grid(spec, /*allow_projection=*/false);

  const auto [g, tests] = materialize(spec.gallery_source);
  const Index n_images = tests.y.cols();
  if (n_images == 0) throw std::invalid_argument("run_breakdown: no test images");

  const int n_methods = static_cast<int>(spec.methods.size());
  const int n_levels = static_cast<int>(spec.perturbation_grid.size());
  const int trials = spec.trials_per_level;
  const Index items_per_level = n_images * trials;

  std::vector<ItemOutcome> outcomes(
      static_cast<std::size_t>(n_levels) * items_per_level * n_methods);

  for_each_index(static_cast<Index>(n_levels) * items_per_level, parallel,
                 [&](Index flat) {
    const int li = static_cast<int>(flat / items_per_level);
    const Index item = flat % items_per_level;
    const Index img = item / trials;
    const int trial = static_cast<int>(item % trials);

    Perturbation p = spec.perturbation_grid[li];
    p.seed = item_seed(spec.seed, li, img, trial);
    const PerturbedImage perturbed =
        apply_perturbation(p, tests.y.col(img), g.height, g.width);

    for (int mi = 0; mi < n_methods; ++mi) {
      const auto t0 = std::chrono::steady_clock::now();
      const Decision d = classify(g, spec.methods[mi], perturbed.y);
      ItemOutcome& out = outcomes[flat * n_methods + mi];
      out.seconds = seconds_since(t0);
      out.correct = d.label == tests.labels[img];
      out.nonconverged = !d.converged;
    }
  });

  return reduce_outcomes(outcomes, method_names(spec.methods),
                         grid_levels(spec.perturbation_grid), items_per_level);
}

Mat comparison_projection(const Gallery& g, std::uint64_t spec_seed, Index d) {
  if (d < 1 || d > g.pixels())
    throw std::invalid_argument(
        "comparison_projection: d must lie in [1, pixel count]");
  Rng rng(Rng::mix({spec_seed, kPhiStream}));
  return gaussian_projection(g.pixels(), d, rng,
                             /*identity=*/d == g.pixels());
}

ExperimentReport run_projected_comparison(const ExperimentSpec& spec, Index d,
                                          bool parallel) {
  validate_grid(spec, /*allow_projection=*/false);

  const auto [g, tests] = materialize(spec.gallery_source);
  const Index n_images = tests.y.cols();
  if (n_images == 0)
    throw std::invalid_argument("run_projected_comparison: no test images");

  const Mat phi = comparison_projection(g, spec.seed, d);
  const Mat phi_a = phi * g.a;

  // The SRC trio borrows the first src method's solver settings.
  SolverConfig src_cfg;
  for (const Method& m : spec.methods)
    if (std::holds_alternative<Src>(m.tag)) {
      src_cfg = m.solver_cfg;
      break;
    }

  const Vec zero_feat = Vec::Zero(d);
  auto feature_residuals = [&](const Vec& y_feat, const Vec& x,
                               const Vec& e_feat) {
    Vec r(static_cast<Index>(g.class_ranges.size()));
    for (const ClassRange& cr : g.class_ranges)
      r(cr.class_id) = (y_feat -
                        phi_a.middleCols(cr.start, cr.count) *
                            x.segment(cr.start, cr.count) -
                        e_feat)
                           .norm();
    return r;
  };

  struct Outcome {
    int label = 0;
    bool converged = true;
  };
  using Runner = std::function<Outcome(const Vec&)>;
  std::vector<std::string> names;
  std::vector<Runner> runners;

  names.emplace_back("src_full");
  runners.emplace_back([&](const Vec& y) {
    const Decision dec = classify_src(g, y, src_cfg);
    return Outcome{dec.label, dec.converged};
  });
  names.emplace_back("src_sparse_e");
  runners.emplace_back([&](const Vec& y) {
    const SparseSolution s =
        solve_projected(g.a, y, phi, ProjectedVariant::SparseE, src_cfg);
    const int label = argmin_label(feature_residuals(phi * y, s.x, phi * s.e));
    return Outcome{label, s.converged};
  });
  names.emplace_back("src_projected_e");
  runners.emplace_back([&](const Vec& y) {
    const SparseSolution s =
        solve_projected(g.a, y, phi, ProjectedVariant::ProjectedE, src_cfg);
    const int label = argmin_label(feature_residuals(phi * y, s.x, s.e));
    return Outcome{label, s.converged};
  });
  // Projected analogues of the l2 baselines, one per method in the spec;
  // the occlusion variant keeps the verbatim residual that excludes W v.
  for (const Method& m : spec.methods) {
    if (std::holds_alternative<L2Plain>(m.tag)) {
      names.emplace_back("l2_projected");
      runners.emplace_back([&](const Vec& y) {
        const Vec y_feat = phi * y;
        const Vec x = min_norm_lsq(phi_a, y_feat);
        return Outcome{argmin_label(feature_residuals(y_feat, x, zero_feat)),
                       true};
      });
    } else if (const L2Occlusion* occ = std::get_if<L2Occlusion>(&m.tag)) {
      if (occ->basis.w.rows() != g.pixels())
        throw std::invalid_argument(
            "run_projected_comparison: occlusion basis does not match the "
            "gallery's pixel count");
      names.emplace_back("l2w_projected");
      runners.emplace_back(
          [&, phi_w = Mat(phi * occ->basis.w)](const Vec& y) {
            const Vec y_feat = phi * y;
            Mat b(phi_a.rows(), phi_a.cols() + phi_w.cols());
            b << phi_a, phi_w;
            const Vec z = min_norm_lsq(b, y_feat);
            const Vec x = z.head(phi_a.cols());
            return Outcome{
                argmin_label(feature_residuals(y_feat, x, zero_feat)), true};
          });
    }
  }

  const int n_methods = static_cast<int>(runners.size());
  const int n_levels = static_cast<int>(spec.perturbation_grid.size());
  const int trials = spec.trials_per_level;
  const Index items_per_level = n_images * trials;

  std::vector<ItemOutcome> outcomes(
      static_cast<std::size_t>(n_levels) * items_per_level * n_methods);

  for_each_index(static_cast<Index>(n_levels) * items_per_level, parallel,
                 [&](Index flat) {
    const int li = static_cast<int>(flat / items_per_level);
    const Index item = flat % items_per_level;
    const Index img = item / trials;
    const int trial = static_cast<int>(item % trials);

    Perturbation p = spec.perturbation_grid[li];
    p.seed = item_seed(spec.seed, li, img, trial);
    const PerturbedImage perturbed =
        apply_perturbation(p, tests.y.col(img), g.height, g.width);

    for (int mi = 0; mi < n_methods; ++mi) {
      const auto t0 = std::chrono::steady_clock::now();
      const Outcome o = runners[mi](perturbed.y);
      ItemOutcome& out = outcomes[flat * n_methods + mi];
      out.seconds = seconds_since(t0);
      out.correct = o.label == tests.labels[img];
      out.nonconverged = !o.converged;
    }
  });

  return reduce_outcomes(outcomes, names,
                         grid_levels(spec.perturbation_grid), items_per_level);
}

void emit_csv(const ExperimentReport& report,
              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "method,level,rate,n_tests,n_nonconverged,wall_time_s\n";
  for (const ReportRow& row : report.rows)
    out << row.method << ',' << format_double(row.level) << ','
        << format_double(row.rate) << ',' << std::to_string(row.n_tests) << ','
        << std::to_string(row.n_nonconverged) << ','
        << format_double(row.wall_time_s) << '\n';
  if (!out.flush())
    throw std::runtime_error("short write to " + path.string());
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) return fields;
    start = comma + 1;
  }
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(where + ": bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::string& where) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(where + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

ExperimentReport parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,level,rate,n_tests,n_nonconverged,wall_time_s")
    throw std::runtime_error(where + ": missing report header");
  ExperimentReport report;
  while (std::getline(in, line)) {
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 6)
      throw std::runtime_error(where + ": expected 6 fields, got " +
                               std::to_string(f.size()));
    ReportRow row;
    row.method = f[0];
    row.level = parse_double(f[1], where);
    row.rate = parse_double(f[2], where);
    row.n_tests = parse_int(f[3], where);
    row.n_nonconverged = parse_int(f[4], where);
    row.wall_time_s = parse_double(f[5], where);
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

// Fixed palette cycled across methods.
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string coord(double v) {
  return format_double(std::llround(v * 100.0) / 100.0);
}

}  // namespace

void emit_plot(const ExperimentReport& report,
               const std::filesystem::path& path) {
  constexpr double kW = 640, kH = 480;
  constexpr double kLeft = 64, kRight = 160, kTop = 24, kBottom = 56;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;

  double lo = 0.0, hi = 1.0;
  if (!report.rows.empty()) {
    lo = hi = report.rows.front().level;
    for (const ReportRow& row : report.rows) {
      lo = std::min(lo, row.level);
      hi = std::max(hi, row.level);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const auto px = [&](double level) {
    return kLeft + (level - lo) / span * plot_w;
  };
  const auto py = [&](double rate) {
    return kTop + (100.0 - rate) / 100.0 * plot_h;
  };

  // Method order: first appearance in the report.
  std::vector<std::string> order;
  for (const ReportRow& row : report.rows)
    if (std::find(order.begin(), order.end(), row.method) == order.end())
      order.push_back(row.method);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 "
      << format_double(kW) << ' ' << format_double(kH)
      << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg << "<rect width=\"" << format_double(kW) << "\" height=\""
      << format_double(kH) << "\" fill=\"white\"/>\n";
  // Axes.
  svg << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(kTop)
      << "\" x2=\"" << coord(kLeft) << "\" y2=\"" << coord(kTop + plot_h)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(kTop + plot_h)
      << "\" x2=\"" << coord(kLeft + plot_w) << "\" y2=\""
      << coord(kTop + plot_h) << "\" stroke=\"black\"/>\n";
  for (int r = 0; r <= 100; r += 25)
    svg << "<text x=\"" << coord(kLeft - 8) << "\" y=\"" << coord(py(r) + 4)
        << "\" text-anchor=\"end\">" << r << "</text>\n";
  // One tick per distinct level, in value order.
  std::vector<double> ticks;
  for (const ReportRow& row : report.rows)
    if (std::find(ticks.begin(), ticks.end(), row.level) == ticks.end())
      ticks.push_back(row.level);
  std::sort(ticks.begin(), ticks.end());
  for (double t : ticks)
    svg << "<text x=\"" << coord(px(t)) << "\" y=\""
        << coord(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
        << format_double(t) << "</text>\n";
  svg << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\""
      << coord(kH - 12) << "\" text-anchor=\"middle\">level</text>\n";
  svg << "<text x=\"16\" y=\"" << coord(kTop + plot_h / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << coord(kTop + plot_h / 2) << ")\">rate</text>\n";

  for (std::size_t mi = 0; mi < order.size(); ++mi) {
    const char* color = kPalette[mi % kPaletteSize];
    std::ostringstream points;
    bool first = true;
    for (const ReportRow& row : report.rows) {
      if (row.method != order[mi]) continue;
      if (!first) points << ' ';
      first = false;
      points << coord(px(row.level)) << ',' << coord(py(row.rate));
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"" << points.str() << "\"/>\n";
    for (const ReportRow& row : report.rows)
      if (row.method == order[mi])
        svg << "<circle cx=\"" << coord(px(row.level)) << "\" cy=\""
            << coord(py(row.rate)) << "\" r=\"3\" fill=\"" << color
            << "\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(mi);
    svg << "<line x1=\"" << coord(kW - kRight + 12) << "\" y1=\""
        << coord(ly - 4) << "\" x2=\"" << coord(kW - kRight + 36)
        << "\" y2=\"" << coord(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << coord(kW - kRight + 42) << "\" y=\"" << coord(ly)
        << "\">" << order[mi] << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << svg.str();
  if (!out.flush())
    throw std::runtime_error("short write to " + path.string());
}

void zero_wall_times(ExperimentReport& report) {
  for (ReportRow& row : report.rows) row.wall_time_s = 0.0;
}

}  // namespace srcbench
