#include "srcbench/bench.hpp"
#include "srcbench/rpca.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <span>
#include <utility>
#include <variant>

namespace py = pybind11;
using namespace srcbench;

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "sparse-representation classification: solvers, robust PCA, synthetic "
      "galleries, perturbations, and the breakdown benchmark harness";

  // --- numcore ---------------------------------------------------------
  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &Rng::next_u64)
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal)
      .def("derive", &Rng::derive, py::arg("stream"))
      .def_property_readonly("seed", &Rng::seed)
      .def_static("mix", [](const std::vector<std::uint64_t>& parts) {
        return Rng::mix(
            std::span<const std::uint64_t>(parts.data(), parts.size()));
      });

  py::class_<SvdFactors>(m, "SvdFactors")
      .def_readonly("u", &SvdFactors::u)
      .def_readonly("sigma", &SvdFactors::sigma)
      .def_readonly("vt", &SvdFactors::vt);
  m.def("svd", &svd, py::arg("m"));
  m.def("min_norm_lsq", &min_norm_lsq, py::arg("a"), py::arg("y"),
        py::arg("rank_tol") = 1e-10);
  m.def("gaussian_mat", &gaussian_mat, py::arg("rows"), py::arg("cols"),
        py::arg("rng"));
  m.def("soft_threshold",
        py::overload_cast<const Vec&, double>(&soft_threshold), py::arg("v"),
        py::arg("tau"));
  m.def("soft_threshold",
        py::overload_cast<const Mat&, double>(&soft_threshold), py::arg("m"),
        py::arg("tau"));
  m.def("shrink_l2", &shrink_l2, py::arg("v"), py::arg("tau"));
  m.def("svt", &svt, py::arg("m"), py::arg("tau"));

  // --- gallery ---------------------------------------------------------
  py::class_<ClassRange>(m, "ClassRange")
      .def_readonly("class_id", &ClassRange::class_id)
      .def_readonly("name", &ClassRange::name)
      .def_readonly("start", &ClassRange::start)
      .def_readonly("count", &ClassRange::count);

  py::class_<Gallery>(m, "Gallery")
      .def_readonly("a", &Gallery::a)
      .def_readonly("class_ranges", &Gallery::class_ranges)
      .def_readonly("height", &Gallery::height)
      .def_readonly("width", &Gallery::width)
      .def_property_readonly("pixels", &Gallery::pixels)
      .def("range_of", &Gallery::range_of, py::arg("class_id"),
           py::return_value_policy::reference_internal);

  py::class_<TestSet>(m, "TestSet")
      .def_readonly("y", &TestSet::y)
      .def_readonly("labels", &TestSet::labels);

  py::class_<OcclusionBasis>(m, "OcclusionBasis")
      .def_readonly("w", &OcclusionBasis::w)
      .def_readonly("grid_rows", &OcclusionBasis::grid_rows)
      .def_readonly("grid_cols", &OcclusionBasis::grid_cols);

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("n_classes", &SynthSpec::n_classes)
      .def_readwrite("subspace_dim", &SynthSpec::subspace_dim)
      .def_readwrite("images_per_class", &SynthSpec::images_per_class)
      .def_readwrite("ambient_dim", &SynthSpec::ambient_dim)
      .def_readwrite("noise_sigma", &SynthSpec::noise_sigma)
      .def_readwrite("seed", &SynthSpec::seed)
      .def_readwrite("tests_per_class", &SynthSpec::tests_per_class)
      .def_readwrite("class_overlap", &SynthSpec::class_overlap);

  m.def("load_image", &load_image, py::arg("file"));
  m.def("write_pgm", &write_pgm, py::arg("file"), py::arg("img"));
  m.def("write_png", &write_png, py::arg("file"), py::arg("img"));
  m.def("bilinear_resize", &bilinear_resize, py::arg("img"), py::arg("out_h"),
        py::arg("out_w"));
  m.def("load_gallery", &load_gallery, py::arg("root"),
        py::arg("resize_to") = std::nullopt);
  m.def("load_test_set", &load_test_set, py::arg("root"), py::arg("gallery"),
        py::arg("resize_to") = std::nullopt);
  m.def("synth_gallery", &synth_gallery, py::arg("spec"));
  m.def("write_gallery", &write_gallery, py::arg("root"), py::arg("gallery"),
        py::arg("tests"));
  m.def("build_occlusion_basis", &build_occlusion_basis, py::arg("height"),
        py::arg("width"), py::arg("grid_rows"), py::arg("grid_cols"));
  m.def("class_subvector", &class_subvector, py::arg("gallery"), py::arg("x"),
        py::arg("class_id"));

  // --- solvers ---------------------------------------------------------
  py::enum_<Norm>(m, "Norm").value("L1", Norm::L1).value("L2", Norm::L2);

  py::class_<ComboProgram>(m, "ComboProgram")
      .def(py::init<>())
      .def_readwrite("x_norm", &ComboProgram::x_norm)
      .def_readwrite("e_norm", &ComboProgram::e_norm);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &SolverConfig::max_iters)
      .def_readwrite("tol_primal", &SolverConfig::tol_primal)
      .def_readwrite("tol_dual", &SolverConfig::tol_dual)
      .def_readwrite("mu0", &SolverConfig::mu0)
      .def_readwrite("mu_growth", &SolverConfig::mu_growth);

  py::class_<SparseSolution>(m, "SparseSolution")
      .def_readonly("x", &SparseSolution::x)
      .def_readonly("e", &SparseSolution::e)
      .def_readonly("iters", &SparseSolution::iters)
      .def_readonly("primal_residual", &SparseSolution::primal_residual)
      .def_readonly("objective", &SparseSolution::objective)
      .def_readonly("converged", &SparseSolution::converged)
      .def_readonly("objective_history", &SparseSolution::objective_history);

  py::class_<LpSolution>(m, "LpSolution")
      .def_readonly("objective", &LpSolution::objective)
      .def_readonly("x", &LpSolution::x)
      .def_readonly("e", &LpSolution::e);

  py::enum_<ProjectedVariant>(m, "ProjectedVariant")
      .value("SparseE", ProjectedVariant::SparseE)
      .value("ProjectedE", ProjectedVariant::ProjectedE);

  m.def("solve_combo", &solve_combo, py::arg("a"), py::arg("y"),
        py::arg("prog"), py::arg("cfg") = SolverConfig{});
  m.def("solve_l1l1", &solve_l1l1, py::arg("a"), py::arg("y"),
        py::arg("cfg") = SolverConfig{});
  m.def("lp_oracle_l1l1", &lp_oracle_l1l1, py::arg("a"), py::arg("y"));
  m.def("solve_projected", &solve_projected, py::arg("a"), py::arg("y"),
        py::arg("phi"), py::arg("variant"), py::arg("cfg") = SolverConfig{});
  m.def("solve_l2l2_closed", &solve_l2l2_closed, py::arg("a"), py::arg("y"),
        py::arg("gamma"));

  // --- rpca ------------------------------------------------------------
  py::class_<RpcaResult>(m, "RpcaResult")
      .def_readonly("l", &RpcaResult::l)
      .def_readonly("s", &RpcaResult::s)
      .def_readonly("iters", &RpcaResult::iters)
      .def_readonly("converged", &RpcaResult::converged);

  py::enum_<SpectrumMode>(m, "SpectrumMode")
      .value("PlainSvd", SpectrumMode::PlainSvd)
      .value("RobustRpca", SpectrumMode::RobustRpca);
  py::enum_<SpectrumScope>(m, "SpectrumScope")
      .value("PerClass", SpectrumScope::PerClass)
      .value("WholeDatabase", SpectrumScope::WholeDatabase);

  py::class_<SpectrumReport>(m, "SpectrumReport")
      .def_readonly("per_subject_sigmas", &SpectrumReport::per_subject_sigmas)
      .def_readonly("mean_sigmas", &SpectrumReport::mean_sigmas)
      .def_readonly("mode", &SpectrumReport::mode)
      .def_readonly("non_converged_classes",
                    &SpectrumReport::non_converged_classes);

  m.def(
      "rpca",
      [](const Mat& d, std::optional<double> lambda, const SolverConfig& cfg) {
        return rpca(d, lambda, cfg);
      },
      py::arg("d"), py::arg("lambda") = std::nullopt,
      py::arg("cfg") = SolverConfig{});
  m.def("spectrum", &spectrum, py::arg("gallery"), py::arg("mode"),
        py::arg("cfg") = SolverConfig{},
        py::arg("scope") = SpectrumScope::PerClass);
  m.def("numerical_rank", &numerical_rank, py::arg("sigmas"),
        py::arg("rel_tol") = 1e-3);
  m.def("write_spectrum_csv", &write_spectrum_csv, py::arg("file"),
        py::arg("report"));

  // --- perturb ---------------------------------------------------------
  py::class_<PixelCorruption>(m, "PixelCorruption")
      .def(py::init<double>(), py::arg("fraction") = 0.0)
      .def_readwrite("fraction", &PixelCorruption::fraction);
  py::class_<BlockOcclusion>(m, "BlockOcclusion")
      .def(py::init<double>(), py::arg("fraction") = 0.0)
      .def_readwrite("fraction", &BlockOcclusion::fraction);
  py::class_<Projection>(m, "Projection")
      .def(py::init<Index, bool>(), py::arg("d") = 1,
           py::arg("identity") = false)
      .def_readwrite("d", &Projection::d)
      .def_readwrite("identity", &Projection::identity);
  py::class_<UniformNoise>(m, "UniformNoise").def(py::init<>());
  py::class_<Texture>(m, "Texture")
      .def(py::init<std::filesystem::path>(), py::arg("path"))
      .def_readwrite("path", &Texture::path);

  py::class_<Perturbation>(m, "Perturbation")
      .def(py::init<>())
      .def_readwrite("kind", &Perturbation::kind)
      .def_readwrite("seed", &Perturbation::seed)
      .def_readwrite("fill", &Perturbation::fill);

  py::class_<PerturbedImage>(m, "PerturbedImage")
      .def_readonly("y", &PerturbedImage::y)
      .def_readonly("true_support", &PerturbedImage::true_support)
      .def_readonly("phi", &PerturbedImage::phi);

  m.def("corrupt_pixels", &corrupt_pixels, py::arg("y"), py::arg("fraction"),
        py::arg("rng"));
  m.def("occlude_block", &occlude_block, py::arg("y"), py::arg("height"),
        py::arg("width"), py::arg("fraction"), py::arg("fill"),
        py::arg("rng"));
  m.def("gaussian_projection", &gaussian_projection, py::arg("m"),
        py::arg("d"), py::arg("rng"), py::arg("identity") = false);
  m.def("apply_perturbation", &apply_perturbation, py::arg("p"), py::arg("y"),
        py::arg("height"), py::arg("width"));

  // --- classify --------------------------------------------------------
  py::class_<Src>(m, "Src").def(py::init<>());
  py::class_<L2Plain>(m, "L2Plain").def(py::init<>());
  py::class_<L2Occlusion>(m, "L2Occlusion")
      .def(py::init<OcclusionBasis>(), py::arg("basis"))
      .def_readwrite("basis", &L2Occlusion::basis);

  py::class_<Method>(m, "Method")
      .def(py::init<>())
      .def_readwrite("tag", &Method::tag)
      .def_readwrite("solver_cfg", &Method::solver_cfg);

  py::class_<Decision>(m, "Decision")
      .def_readonly("label", &Decision::label)
      .def_readonly("residuals", &Decision::residuals)
      .def_readonly("solution", &Decision::solution)
      .def_readonly("converged", &Decision::converged);

  m.def("classify_src", &classify_src, py::arg("gallery"), py::arg("y"),
        py::arg("cfg") = SolverConfig{});
  m.def("classify_l2_plain", &classify_l2_plain, py::arg("gallery"),
        py::arg("y"));
  m.def("classify_l2_occlusion", &classify_l2_occlusion, py::arg("gallery"),
        py::arg("w"), py::arg("y"));
  m.def("classify", &classify, py::arg("gallery"), py::arg("method"),
        py::arg("y"));

  // --- bench -----------------------------------------------------------
  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def(py::init<>())
      .def_readwrite("gallery_source", &ExperimentSpec::gallery_source)
      .def_readwrite("methods", &ExperimentSpec::methods)
      .def_readwrite("perturbation_grid", &ExperimentSpec::perturbation_grid)
      .def_readwrite("trials_per_level", &ExperimentSpec::trials_per_level)
      .def_readwrite("seed", &ExperimentSpec::seed);

  py::class_<ReportRow>(m, "ReportRow")
      .def(py::init<>())
      .def_readwrite("method", &ReportRow::method)
      .def_readwrite("level", &ReportRow::level)
      .def_readwrite("rate", &ReportRow::rate)
      .def_readwrite("n_tests", &ReportRow::n_tests)
      .def_readwrite("n_nonconverged", &ReportRow::n_nonconverged)
      .def_readwrite("wall_time_s", &ReportRow::wall_time_s);

  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def(py::init<>())
      .def_readwrite("rows", &ExperimentReport::rows);

  m.def("materialize", &materialize, py::arg("source"));
  m.def("perturbation_level", &perturbation_level, py::arg("p"));
  m.def("item_seed", &item_seed, py::arg("spec_seed"), py::arg("level_idx"),
        py::arg("image_idx"), py::arg("trial"));
  m.def("comparison_projection", &comparison_projection, py::arg("gallery"),
        py::arg("spec_seed"), py::arg("d"));
  m.def("run_breakdown", &run_breakdown, py::arg("spec"),
        py::arg("parallel") = false,
        py::call_guard<py::gil_scoped_release>());
  m.def("run_projected_comparison", &run_projected_comparison,
        py::arg("spec"), py::arg("d"), py::arg("parallel") = false,
        py::call_guard<py::gil_scoped_release>());
  m.def("emit_csv", &emit_csv, py::arg("report"), py::arg("path"));
  m.def("parse_csv", &parse_csv, py::arg("path"));
  m.def("emit_plot", &emit_plot, py::arg("report"), py::arg("path"));
  m.def("zero_wall_times", &zero_wall_times, py::arg("report"));
}
