// Python bindings for the core operations: sensing-matrix construction,
// scene simulation, sparse recovery and evaluation metrics.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tofcs/experiment.hpp"
#include "tofcs/geometry.hpp"
#include "tofcs/io.hpp"
#include "tofcs/metrics.hpp"
#include "tofcs/recovery.hpp"
#include "tofcs/sensing.hpp"
#include "tofcs/simulator.hpp"

namespace py = pybind11;
using namespace tofcs;

namespace {

DepthMap depth_map_from_array(const py::array_t<double>& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("depth map must be 2-D");
    const int h = static_cast<int>(arr.shape(0));
    const int w = static_cast<int>(arr.shape(1));
    DepthMap map(w, h);
    auto view = arr.unchecked<2>();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v = view(y, x);
            if (std::isnan(v))
                map.set(x, y, 0.0, false);
            else
                map.set(x, y, v, true);
        }
    return map;
}

py::array_t<double> depth_map_to_array(const DepthMap& map) {
    py::array_t<double> arr({map.height, map.width});
    auto view = arr.mutable_unchecked<2>();
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x)
            view(y, x) = map.is_valid(x, y) ? map.at(x, y)
                                            : std::numeric_limits<double>::quiet_NaN();
    return arr;
}

}  // namespace

PYBIND11_MODULE(_tofcs, m) {
    m.doc() = "Compressed-sensing multipath suppression for iToF depth imaging";

    py::class_<DepthGrid>(m, "DepthGrid")
        .def(py::init<double, double, double>(), py::arg("d_min_mm"), py::arg("d_max_mm"),
             py::arg("step_mm"))
        .def_readonly("d_min_mm", &DepthGrid::d_min_mm)
        .def_readonly("d_max_mm", &DepthGrid::d_max_mm)
        .def_readonly("step_mm", &DepthGrid::step_mm)
        .def_property_readonly("n_bins", &DepthGrid::n_bins)
        .def("depth_of", &DepthGrid::depth_of)
        .def("nearest_bin", &DepthGrid::nearest_bin);

    py::class_<ModulationPlan>(m, "ModulationPlan")
        .def_static("standard", &ModulationPlan::standard, py::arg("n_shifts") = 20)
        .def_readwrite("f_mod_hz", &ModulationPlan::f_mod_hz)
        .def_readwrite("phase_shifts", &ModulationPlan::phase_shifts)
        .def_readwrite("duty_cycle", &ModulationPlan::duty_cycle)
        .def_property_readonly("n_configs", &ModulationPlan::n_configs)
        .def("unambiguous_range_mm", &ModulationPlan::unambiguous_range_mm)
        .def("validate", &ModulationPlan::validate);

    py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
                 CameraIntrinsics intr{fx, fy, cx, cy, width, height};
                 intr.validate();
                 return intr;
             }),
             py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
             py::arg("height"))
        .def_readonly("fx", &CameraIntrinsics::fx)
        .def_readonly("fy", &CameraIntrinsics::fy)
        .def_readonly("cx", &CameraIntrinsics::cx)
        .def_readonly("cy", &CameraIntrinsics::cy)
        .def_readonly("width", &CameraIntrinsics::width)
        .def_readonly("height", &CameraIntrinsics::height);

    py::enum_<AtomModel>(m, "AtomModel")
        .value("IdealSinusoid", AtomModel::IdealSinusoid)
        .value("DutyCycleCorrelation", AtomModel::DutyCycleCorrelation);

    m.def("normalized_coords", &normalized_coords, py::arg("u"), py::arg("v"),
          py::arg("intrinsics"));
    m.def("corrected_range", &corrected_range, py::arg("depth_mm"), py::arg("x"), py::arg("y"));
    m.def("radial_to_axial", &radial_to_axial, py::arg("range_mm"), py::arg("x"), py::arg("y"));
    m.def("duty_correlation", &duty_correlation, py::arg("psi"), py::arg("duty"));
    m.def("sampled_duty_correlation", &sampled_duty_correlation, py::arg("psi"), py::arg("duty"),
          py::arg("n_samples") = 4096);

    py::class_<PixelRef>(m, "PixelRef")
        .def(py::init([](double u, double v, const CameraIntrinsics& intr) {
                 return PixelRef{u, v, intr};
             }),
             py::arg("u"), py::arg("v"), py::arg("intrinsics"))
        .def_readonly("u", &PixelRef::u)
        .def_readonly("v", &PixelRef::v);

    py::class_<SensingMatrix>(m, "SensingMatrix")
        .def_property_readonly("entries",
                               [](const SensingMatrix& A) { return A.entries; })
        .def_property_readonly("column_norms",
                               [](const SensingMatrix& A) { return A.column_norms; })
        .def_readonly("grid", &SensingMatrix::grid)
        .def_readonly("atom_model", &SensingMatrix::atom_model)
        .def_property_readonly("rows", &SensingMatrix::rows)
        .def_property_readonly("cols", &SensingMatrix::cols);

    m.def("build_sensing_matrix", &build_sensing_matrix, py::arg("grid"), py::arg("plan"),
          py::arg("pixel") = std::nullopt,
          py::arg("model") = AtomModel::DutyCycleCorrelation);
    m.def("mutual_coherence", &mutual_coherence);
    m.def("save_sensing_matrix", &save_sensing_matrix);
    m.def("load_sensing_matrix", &load_sensing_matrix);

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init([](double sigma, bool shot, double dark, std::uint64_t seed) {
                 NoiseModel n{sigma, shot, dark, seed};
                 n.validate();
                 return n;
             }),
             py::arg("read_noise_sigma") = 0.0, py::arg("shot_noise") = false,
             py::arg("dark_offset") = 0.0, py::arg("seed") = 0)
        .def_readwrite("read_noise_sigma", &NoiseModel::read_noise_sigma)
        .def_readwrite("shot_noise", &NoiseModel::shot_noise)
        .def_readwrite("dark_offset", &NoiseModel::dark_offset)
        .def_readwrite("seed", &NoiseModel::seed);

    m.def("default_read_noise_sigma", &default_read_noise_sigma);

    py::class_<PathReturn>(m, "PathReturn")
        .def(py::init([](double depth, double amp) { return PathReturn{depth, amp}; }),
             py::arg("depth_mm"), py::arg("amplitude"))
        .def_readwrite("depth_mm", &PathReturn::depth_mm)
        .def_readwrite("amplitude", &PathReturn::amplitude);

    py::class_<MultipathScene>(m, "MultipathScene")
        .def_readonly("width", &MultipathScene::width)
        .def_readonly("height", &MultipathScene::height)
        .def_readonly("label", &MultipathScene::label)
        .def("paths_at", [](const MultipathScene& s, int x, int y) { return s.at(x, y); })
        .def_property_readonly("truth",
                               [](const MultipathScene& s) { return depth_map_to_array(s.truth); });

    m.def("make_two_path_scene", &make_two_path_scene, py::arg("grid"),
          py::arg("primary_depth_mm"), py::arg("separation_mm"), py::arg("ratio"),
          py::arg("width") = 1, py::arg("height") = 1);
    m.def("make_corner_scene", &make_corner_scene, py::arg("grid"), py::arg("intrinsics"),
          py::arg("corner_depth_mm"), py::arg("bounce_ratio"));
    m.def("make_glass_scene", &make_glass_scene, py::arg("grid"), py::arg("width"),
          py::arg("height"), py::arg("glass_depth_mm"), py::arg("wall_depth_mm"),
          py::arg("wall_ratio"));

    py::class_<RawFourPhase>(m, "RawFourPhase")
        .def_readonly("width", &RawFourPhase::width)
        .def_readonly("height", &RawFourPhase::height)
        .def_readonly("n_frames", &RawFourPhase::n_frames)
        .def_readonly("subtracted", &RawFourPhase::subtracted)
        .def_property_readonly("n_configs", &RawFourPhase::n_configs)
        .def("tap", [](const RawFourPhase& raw, int config, int tap) {
            if (config < 0 || config >= raw.n_configs() || tap < 0 || tap >= 4)
                throw std::out_of_range("tap index");
            py::array_t<double> arr({raw.height, raw.width});
            auto view = arr.mutable_unchecked<2>();
            for (int y = 0; y < raw.height; ++y)
                for (int x = 0; x < raw.width; ++x)
                    view(y, x) = raw.taps[config][tap][raw.index(x, y)];
            return arr;
        });

    m.def("synthesize_observation", &synthesize_observation, py::arg("paths"), py::arg("A_true"),
          py::arg("noise") = NoiseModel{});
    m.def("scene_vector", &scene_vector, py::arg("paths"), py::arg("grid"));
    m.def("render_four_phase", &render_four_phase, py::arg("scene"), py::arg("plan"),
          py::arg("intrinsics") = std::nullopt, py::arg("noise") = NoiseModel{},
          py::arg("n_frames") = 1, py::arg("waveform") = AtomModel::DutyCycleCorrelation);
    m.def("render_four_phase_pixel", &render_four_phase_pixel, py::arg("paths"), py::arg("plan"),
          py::arg("pixel") = std::nullopt, py::arg("noise") = NoiseModel{},
          py::arg("n_frames") = 1, py::arg("waveform") = AtomModel::DutyCycleCorrelation);
    m.def("baseline_subtract", &baseline_subtract);
    m.def("to_complex_observation", &to_complex_observation, py::arg("raw"), py::arg("x") = 0,
          py::arg("y") = 0);
    m.def("emulate_calibration", &emulate_calibration, py::arg("grid"), py::arg("plan"),
          py::arg("pixel") = std::nullopt, py::arg("noise") = NoiseModel{},
          py::arg("n_frames") = 100);

    py::class_<ClusteredDictionary>(m, "ClusteredDictionary")
        .def_readonly("k_clusters", &ClusteredDictionary::k_clusters)
        .def_readonly("labels", &ClusteredDictionary::labels)
        .def_property_readonly("matrix",
                               [](const ClusteredDictionary& d) { return d.matrix; })
        .def_property_readonly("cluster_sizes", [](const ClusteredDictionary& d) {
            std::vector<size_t> sizes;
            for (const auto& mem : d.members) sizes.push_back(mem.size());
            return sizes;
        });

    py::class_<SparseSolution>(m, "SparseSolution")
        .def_readonly("support", &SparseSolution::support)
        .def_property_readonly("coefficients",
                               [](const SparseSolution& s) { return s.coefficients; })
        .def_readonly("residual_norm", &SparseSolution::residual_norm)
        .def_readonly("iterations", &SparseSolution::iterations)
        .def_readonly("cluster_id", &SparseSolution::cluster_id)
        .def_readonly("stalled", &SparseSolution::stalled)
        .def_readonly("converged", &SparseSolution::converged);

    m.def("cluster_dictionary", &cluster_dictionary, py::arg("A"), py::arg("k_clusters"),
          py::arg("seed") = 0);
    m.def("select_cluster", &select_cluster);
    m.def(
        "cc_omp",
        [](const Eigen::VectorXcd& c, const ClusteredDictionary& dict, int k_sparse,
           double residual_tol, int margin) {
            return cc_omp(c, dict, k_sparse, residual_tol, margin);
        },
        py::arg("c"), py::arg("dict"), py::arg("k_sparse") = 3, py::arg("residual_tol") = 1e-3,
        py::arg("neighbor_margin") = 2);
    m.def("omp_full", &omp_full, py::arg("c"), py::arg("A"), py::arg("k_sparse") = 3,
          py::arg("residual_tol") = 1e-3);
    m.def(
        "cosamp",
        [](const Eigen::VectorXcd& c, const SensingMatrix& A, int k, int max_iter, double tol) {
            return cosamp(c, A, k, CoSaMPParams{max_iter, tol});
        },
        py::arg("c"), py::arg("A"), py::arg("k_sparse") = 3, py::arg("max_iterations") = 50,
        py::arg("residual_tol") = 1e-6);
    m.def(
        "fista",
        [](const Eigen::VectorXcd& c, const SensingMatrix& A, double lambda, int max_iter) {
            FistaParams p;
            p.lambda = lambda;
            p.max_iterations = max_iter;
            return fista(c, A, p);
        },
        py::arg("c"), py::arg("A"), py::arg("lambda") = 1e-3, py::arg("max_iterations") = 500);

    py::class_<DepthEstimate>(m, "DepthEstimate")
        .def_readonly("depth_index", &DepthEstimate::depth_index)
        .def_readonly("depth_mm", &DepthEstimate::depth_mm)
        .def_readonly("primary_amplitude", &DepthEstimate::primary_amplitude)
        .def_readonly("secondary_paths", &DepthEstimate::secondary_paths)
        .def_readonly("clamped", &DepthEstimate::clamped);

    m.def("extract_depth_index", &extract_depth_index, py::arg("solution"), py::arg("k_top") = 3,
          py::arg("window") = 3);
    m.def(
        "index_to_depth",
        [](double index, const DepthGrid& grid) {
            bool clamped = false;
            const double d = index_to_depth(index, grid, &clamped);
            return py::make_tuple(d, clamped);
        },
        py::arg("depth_index"), py::arg("grid"));
    m.def("estimate_depth", &estimate_depth, py::arg("solution"), py::arg("grid"),
          py::arg("k_top") = 3, py::arg("window") = 3);
    m.def("to_dense_amplitudes", &to_dense_amplitudes);

    py::class_<NaiveDepth>(m, "NaiveDepth")
        .def_readonly("range_mm", &NaiveDepth::range_mm)
        .def_readonly("valid", &NaiveDepth::valid);
    m.def("naive_four_phase_depth", &naive_four_phase_depth, py::arg("raw"), py::arg("x"),
          py::arg("y"), py::arg("config"), py::arg("f_mod_hz"));
    m.def("naive_depth_coherent", &naive_depth_coherent, py::arg("raw"), py::arg("x"),
          py::arg("y"));

    m.def(
        "mae",
        [](const py::array_t<double>& pred, const py::array_t<double>& truth) {
            return mae(depth_map_from_array(pred), depth_map_from_array(truth));
        },
        py::arg("pred"), py::arg("truth"));
    m.def(
        "rmse",
        [](const py::array_t<double>& pred, const py::array_t<double>& truth) {
            return rmse(depth_map_from_array(pred), depth_map_from_array(truth));
        },
        py::arg("pred"), py::arg("truth"));
    m.def(
        "ssim",
        [](const py::array_t<double>& pred, const py::array_t<double>& truth, int window,
           double c1, double c2) {
            return ssim(depth_map_from_array(pred), depth_map_from_array(truth), window, c1, c2);
        },
        py::arg("pred"), py::arg("truth"), py::arg("window") = 7, py::arg("c1") = 100.0,
        py::arg("c2") = 900.0);
    m.def(
        "recon_error_pct",
        [](const Eigen::VectorXcd& g_hat, const Eigen::VectorXcd& g_true) {
            return recon_error_pct(g_hat, g_true);
        },
        py::arg("g_hat"), py::arg("g_true"));

    m.def(
        "backproject",
        [](const py::array_t<double>& depth, const CameraIntrinsics& intr) {
            const PointCloud cloud = backproject(depth_map_from_array(depth), intr);
            py::array_t<double> pts({static_cast<py::ssize_t>(cloud.size()),
                                     static_cast<py::ssize_t>(3)});
            auto view = pts.mutable_unchecked<2>();
            for (size_t i = 0; i < cloud.size(); ++i)
                for (int k = 0; k < 3; ++k) view(static_cast<py::ssize_t>(i), k) = cloud.points[i][k];
            return pts;
        },
        py::arg("depth"), py::arg("intrinsics"));

    // Pipeline entry points driven by config JSON.
    m.def(
        "run_simulate",
        [](const std::string& config_json, const std::string& out_dir) {
            run_simulate(config_from_json(nlohmann::json::parse(config_json)), out_dir);
        },
        py::arg("config_json"), py::arg("out_dir"));
    m.def(
        "run_reconstruct",
        [](const std::string& config_json, const std::string& dir, const std::string& method,
           int threads) {
            run_reconstruct(config_from_json(nlohmann::json::parse(config_json)), dir,
                            solver_method_from_string(method), threads);
        },
        py::arg("config_json"), py::arg("artifact_dir"), py::arg("method") = "cc_omp",
        py::arg("threads") = 1);
    m.def(
        "run_evaluate",
        [](const std::string& config_json, const std::string& dir, const std::string& out) {
            run_evaluate(config_from_json(nlohmann::json::parse(config_json)), dir, out);
        },
        py::arg("config_json"), py::arg("artifact_dir"), py::arg("out_dir"));
    m.def("default_config_json",
          []() { return config_to_json(ExperimentConfig{}).dump(2); });
}
