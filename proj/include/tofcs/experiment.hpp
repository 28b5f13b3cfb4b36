#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "tofcs/io.hpp"
#include "tofcs/metrics.hpp"
#include "tofcs/recovery.hpp"
#include "tofcs/sensing.hpp"
#include "tofcs/simulator.hpp"

namespace tofcs {

/// Parametric scene description used by the experiment configs.
struct SceneSpec {
    std::string type = "two_path";  // two_path | corner | glass
    double primary_depth_mm = 650.0;
    double separation_mm = 300.0;
    double ratio = 0.4;
    double corner_depth_mm = 800.0;
    double bounce_ratio = 0.3;
    double glass_depth_mm = 600.0;
    double wall_depth_mm = 1100.0;
    double wall_ratio = 0.5;
};

/// Everything a run needs; a stored config re-runs bit-identically.
struct ExperimentConfig {
    DepthGrid grid{300.0, 1300.0, 1.0};
    ModulationPlan plan = ModulationPlan::standard();
    CameraIntrinsics intrinsics{40.0, 40.0, 15.5, 11.5, 32, 24};
    SceneSpec scene;
    double read_noise_sigma = -1.0;  // < 0: 1% of the correlation peak
    bool shot_noise = false;
    double dark_offset = 10.0;
    int n_frames = 100;
    SolverConfig solver;
    std::uint64_t seed = 0;

    NoiseModel noise_model() const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Canonical hash over the full config JSON.
std::string config_hash(const ExperimentConfig& cfg);

/// Instantiate the configured scene (always camera-sized).
MultipathScene build_scene(const ExperimentConfig& cfg);

/// simulate: scene JSON, raw tap rasters, ground-truth depth, manifest.
void run_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

/// calibrate: scan-emulated sensing matrix written as a binary container
/// (optionally also the debug CSV).
void run_calibrate(const ExperimentConfig& cfg, const std::string& out_dir,
                   bool write_csv = false);

/// reconstruct: per-pixel recovery of the raw artifacts in `artifact_dir`
/// with the given method; writes depth, solutions, point cloud, manifest.
void run_reconstruct(const ExperimentConfig& cfg, const std::string& artifact_dir,
                     SolverMethod method, int threads = 1,
                     const std::optional<std::string>& matrix_path = std::nullopt);

/// evaluate: metrics report (sorted by MAE) plus a cross-section CSV with
/// one row per image row at the central column.
void run_evaluate(const ExperimentConfig& cfg, const std::string& artifact_dir,
                  const std::string& out_dir);

/// matrix-info: human-readable diagnostics (coherence, cluster sizes).
std::string matrix_info(const ExperimentConfig& cfg,
                        const std::optional<std::string>& matrix_path = std::nullopt);

}  // namespace tofcs
