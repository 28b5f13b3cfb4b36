#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tofcs {

using cplx = std::complex<double>;

/// Speed of light in mm/s (exact).
inline constexpr double kSpeedOfLightMmPerSec = 2.99792458e11;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Discretization of the unambiguous depth range into distance bins.
/// Bin i corresponds to depth d_min + i * step.
struct DepthGrid {
    double d_min_mm = 300.0;
    double d_max_mm = 1300.0;
    double step_mm = 1.0;

    DepthGrid() = default;
    DepthGrid(double d_min, double d_max, double step)
        : d_min_mm(d_min), d_max_mm(d_max), step_mm(step) {
        validate();
    }

    void validate() const {
        if (d_min_mm <= 0.0) throw std::invalid_argument("DepthGrid: d_min must be > 0");
        if (step_mm <= 0.0) throw std::invalid_argument("DepthGrid: step must be > 0");
        if (d_max_mm <= d_min_mm) throw std::invalid_argument("DepthGrid: d_max must exceed d_min");
    }

    int n_bins() const {
        return static_cast<int>(std::floor((d_max_mm - d_min_mm) / step_mm)) + 1;
    }

    double depth_of(double bin_index) const { return d_min_mm + bin_index * step_mm; }

    /// Nearest-bin placement; throws if the depth falls outside the grid.
    int nearest_bin(double depth_mm) const {
        if (depth_mm < d_min_mm || depth_mm > d_max_mm)
            throw std::invalid_argument("DepthGrid: depth outside grid range");
        int bin = static_cast<int>(std::lround((depth_mm - d_min_mm) / step_mm));
        if (bin < 0) bin = 0;
        if (bin >= n_bins()) bin = n_bins() - 1;
        return bin;
    }

    bool contains(double depth_mm) const {
        return depth_mm >= d_min_mm && depth_mm <= d_max_mm;
    }
};

/// Modulation configuration: one carrier frequency, a set of reference
/// phase shifts, and the duty cycle of the rectangular emission waveform.
/// The four demodulation taps are fixed at 0, pi/2, pi, 3pi/2.
struct ModulationPlan {
    double f_mod_hz = 100e6;
    std::vector<double> phase_shifts;  // radians, strictly increasing in [0, 2pi)
    double duty_cycle = 0.05;

    static constexpr int kNumTaps = 4;

    /// The four quadrature demodulation offsets.
    static std::vector<double> tap_offsets() {
        return {0.0, kPi / 2.0, kPi, 3.0 * kPi / 2.0};
    }

    /// Default plan: 100 MHz, 20 equispaced phase shifts, 5% duty cycle.
    static ModulationPlan standard(int n_shifts = 20) {
        ModulationPlan plan;
        plan.phase_shifts.reserve(n_shifts);
        for (int m = 0; m < n_shifts; ++m)
            plan.phase_shifts.push_back(kTwoPi * m / n_shifts);
        plan.validate();
        return plan;
    }

    void validate() const {
        if (f_mod_hz <= 0.0) throw std::invalid_argument("ModulationPlan: f_mod must be > 0");
        if (phase_shifts.size() < 2)
            throw std::invalid_argument("ModulationPlan: need at least 2 phase shifts");
        for (size_t i = 0; i < phase_shifts.size(); ++i) {
            if (phase_shifts[i] < 0.0 || phase_shifts[i] >= kTwoPi)
                throw std::invalid_argument("ModulationPlan: phase shifts must lie in [0, 2pi)");
            if (i > 0 && phase_shifts[i] <= phase_shifts[i - 1])
                throw std::invalid_argument("ModulationPlan: phase shifts must be strictly increasing");
        }
        if (duty_cycle <= 0.0 || duty_cycle > 1.0)
            throw std::invalid_argument("ModulationPlan: duty cycle must be in (0, 1]");
    }

    int n_configs() const { return static_cast<int>(phase_shifts.size()); }

    /// Maximum depth encodable without phase wrap: c / (2 f).
    double unambiguous_range_mm() const {
        return kSpeedOfLightMmPerSec / (2.0 * f_mod_hz);
    }
};

/// Pinhole camera intrinsics (pixels).
struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    void validate() const {
        if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("CameraIntrinsics: focal lengths must be > 0");
        if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
            throw std::invalid_argument("CameraIntrinsics: principal point outside sensor");
    }

    bool in_bounds(double u, double v) const {
        return u >= 0.0 && u < width && v >= 0.0 && v < height;
    }
};

/// A pixel paired with the intrinsics it belongs to; identifies which
/// viewing ray a per-pixel sensing matrix was corrected for.
struct PixelRef {
    double u = 0.0;
    double v = 0.0;
    CameraIntrinsics intrinsics;
};

/// Column model of the sensing matrix.
enum class AtomModel : std::uint8_t {
    IdealSinusoid,        // pure phasor exp(j(2 pi f tau - phi_m))
    DutyCycleCorrelation  // four-tap combination of the rectangular-pulse correlation
};

inline std::string to_string(AtomModel model) {
    switch (model) {
        case AtomModel::IdealSinusoid: return "ideal_sinusoid";
        case AtomModel::DutyCycleCorrelation: return "duty_cycle_correlation";
    }
    return "unknown";
}

inline AtomModel atom_model_from_string(const std::string& name) {
    if (name == "ideal_sinusoid") return AtomModel::IdealSinusoid;
    if (name == "duty_cycle_correlation") return AtomModel::DutyCycleCorrelation;
    throw std::invalid_argument("unknown atom model: " + name);
}

}  // namespace tofcs
