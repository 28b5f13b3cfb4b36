#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tofcs/metrics.hpp"
#include "tofcs/sensing.hpp"
#include "tofcs/types.hpp"

namespace tofcs {

/// One return path: axial depth and nonnegative amplitude.
struct PathReturn {
    double depth_mm = 0.0;
    double amplitude = 0.0;
};

using PixelPaths = std::vector<PathReturn>;

/// Sparse ground-truth description of a scene: per-pixel return paths.
struct MultipathScene {
    int width = 1;
    int height = 1;
    std::string label;
    std::vector<PixelPaths> pixels;      // row-major, each with >= 1 path
    DepthMap truth;                      // axial depth of the primary return

    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    const PixelPaths& at(int x, int y) const { return pixels[index(x, y)]; }
    PixelPaths& at(int x, int y) { return pixels[index(x, y)]; }
};

/// Additive noise configuration for simulated captures. A given seed
/// reproduces captures bit-identically, including under parallel rendering.
struct NoiseModel {
    double read_noise_sigma = 0.0;  // per-frame std, intensity units
    bool shot_noise = false;        // Poisson-like variance ~ signal level
    double dark_offset = 0.0;       // constant background, intensity units
    std::uint64_t seed = 0;

    void validate() const {
        if (read_noise_sigma < 0.0) throw std::invalid_argument("NoiseModel: sigma must be >= 0");
        if (dark_offset < 0.0) throw std::invalid_argument("NoiseModel: dark offset must be >= 0");
    }

    static NoiseModel none() { return {}; }
};

/// Default read noise for a plan: 1% of the unit-amplitude correlation peak.
double default_read_noise_sigma(const ModulationPlan& plan);

/// Simulated per-phase-config tap frames (I0, I90, I180, I270) and their
/// TX-off dark frames, each averaged over n_frames captures.
struct RawFourPhase {
    int width = 0;
    int height = 0;
    int n_frames = 1;
    bool subtracted = false;
    ModulationPlan plan;
    // taps[m][t] and darks[m][t] are row-major width*height frames,
    // t in {0: 0 deg, 1: 90 deg, 2: 180 deg, 3: 270 deg}.
    std::vector<std::array<std::vector<double>, 4>> taps;
    std::vector<std::array<std::vector<double>, 4>> darks;

    int n_configs() const { return static_cast<int>(taps.size()); }
    bool has_darks() const {
        return !darks.empty() && !darks.front()[0].empty();
    }
    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

/// Direct linear observation c = A g + eps for one pixel: path amplitudes
/// placed at nearest grid bins, columns taken at their physical scale, and
/// eps complex Gaussian with per-component std read_noise_sigma.
Eigen::VectorXcd synthesize_observation(const PixelPaths& paths, const SensingMatrix& A_true,
                                        const NoiseModel& noise);

/// Dense ground-truth backscatter vector: amplitudes at nearest bins.
Eigen::VectorXcd scene_vector(const PixelPaths& paths, const DepthGrid& grid);

/// Render the four-tap correlation frames for every pixel of a scene.
/// Tap intensity = sum over paths of amplitude * correlation at the path
/// delay (pixel-corrected when intrinsics given) + dark offset + noise,
/// averaged over n_frames captures. Dark frames carry offset + noise only.
RawFourPhase render_four_phase(const MultipathScene& scene, const ModulationPlan& plan,
                               const std::optional<CameraIntrinsics>& intrinsics,
                               const NoiseModel& noise, int n_frames,
                               AtomModel waveform = AtomModel::DutyCycleCorrelation);

/// Single-pixel convenience wrapper around render_four_phase.
RawFourPhase render_four_phase_pixel(const PixelPaths& paths, const ModulationPlan& plan,
                                     const std::optional<PixelRef>& pixel,
                                     const NoiseModel& noise, int n_frames,
                                     AtomModel waveform = AtomModel::DutyCycleCorrelation);

/// Subtract each tap's matching dark frame; dark frames are zeroed in the
/// output and the result is flagged as subtracted.
RawFourPhase baseline_subtract(const RawFourPhase& raw);

/// Dual-tap pairing (I0 - I180) + j (I90 - I270) for one pixel, one value
/// per phase configuration. Requires baseline-subtracted input.
Eigen::VectorXcd to_complex_observation(const RawFourPhase& raw, int x, int y);

/// Emulate the scan-based calibration: for each grid depth, render a
/// unit-amplitude single-path capture, baseline-subtract, form the complex
/// observation, and stack the results as matrix columns (then normalize).
SensingMatrix emulate_calibration(const DepthGrid& grid, const ModulationPlan& plan,
                                  const std::optional<PixelRef>& pixel,
                                  const NoiseModel& noise, int n_frames = 100);

// ---- Canonical scenes -------------------------------------------------

/// Two-return pixel field: primary at `primary_depth_mm`, interference at
/// `primary + separation`, amplitude `ratio`. width*height identical pixels.
MultipathScene make_two_path_scene(const DepthGrid& grid, double primary_depth_mm,
                                   double separation_mm, double ratio,
                                   int width = 1, int height = 1);

/// Two walls meeting at 90 degrees, corner edge on the optical axis at
/// `corner_depth_mm`. Each pixel carries the direct wall return plus a
/// specular second-bounce return via the opposite wall with amplitude
/// `bounce_ratio`. Paths are stored as axial depths.
MultipathScene make_corner_scene(const DepthGrid& grid, const CameraIntrinsics& intrinsics,
                                 double corner_depth_mm, double bounce_ratio);

/// Fronto-parallel glass pane at `glass_depth_mm` (primary, amplitude 1)
/// with an attenuated wall return behind it.
MultipathScene make_glass_scene(const DepthGrid& grid, int width, int height,
                                double glass_depth_mm, double wall_depth_mm,
                                double wall_ratio);

}  // namespace tofcs
