#pragma once

#include <Eigen/Dense>
#include <optional>

#include "tofcs/types.hpp"

namespace tofcs {

/// Project a pixel onto normalized angular coordinates:
/// x = (u - cx) / fx, y = (v - cy) / fy.
/// Throws if (u, v) lies outside the sensor.
std::pair<double, double> normalized_coords(double u, double v, const CameraIntrinsics& intr);

/// Oblique-path elongation: the travel path of a return at axial depth d
/// seen through normalized coordinates (x, y) is r = d * sqrt(1 + x^2 + y^2).
double corrected_range(double depth_mm, double x, double y);

/// Circular correlation of the unit-amplitude rectangular emission waveform
/// (on-fraction `duty`) with a copy of itself shifted by phase `psi`:
/// the exact pulse-overlap integral, a periodic triangle.
double duty_correlation(double psi, double duty);

/// Same correlation evaluated as the mean of the sampled product over
/// `n_samples` points per period (closed-form interval counting; exactly
/// equals the literal sample loop). Converges to duty_correlation.
double sampled_duty_correlation(double psi, double duty, int n_samples = 4096);

/// Correlation response of the given waveform model at relative phase `psi`.
/// Sinusoid: 0.5 * cos(psi). Rectangular: duty_correlation(psi, duty).
double waveform_correlation(AtomModel model, double duty, double psi);

/// Four-tap complex combination (C(0)-C(pi)) + j(C(pi/2)-C(3pi/2)) of the
/// correlation at base offset `u` (= delay phase minus reference phase).
cplx four_tap_response(AtomModel model, double duty, double u);

/// Delay phase 2 pi f tau for a return at axial depth `depth_mm`, including
/// the per-pixel path elongation when a pixel is given.
double delay_phase(const ModulationPlan& plan, double depth_mm,
                   const std::optional<PixelRef>& pixel);

/// Unnormalized modulation response of a single return at `depth_mm`:
/// one complex value per phase-shift configuration.
Eigen::VectorXcd response_vector(const ModulationPlan& plan, double depth_mm,
                                 const std::optional<PixelRef>& pixel, AtomModel model);

/// Complex sensing matrix: rows = phase configurations, columns = distance
/// bins. Columns are unit-norm; the pre-normalization norms are retained.
struct SensingMatrix {
    Eigen::MatrixXcd entries;       // L x n_bins, column-normalized
    DepthGrid grid;
    ModulationPlan plan;
    std::optional<PixelRef> pixel;  // present when distortion-corrected
    AtomModel atom_model = AtomModel::DutyCycleCorrelation;
    Eigen::VectorXd column_norms;   // Euclidean norms recorded at normalization

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }

    /// Reconstruct the physical (unnormalized) column for a bin.
    Eigen::VectorXcd unnormalized_column(int bin) const {
        return entries.col(bin) * column_norms(bin);
    }
};

/// Normalize each column to unit Euclidean norm in place; returns the
/// original norms. Throws on a zero column.
Eigen::VectorXd normalize_columns(Eigen::MatrixXcd& matrix);

/// Build the sensing matrix A for a grid/plan pair. Entry (m, i) is the
/// modulation response of distance bin i under phase configuration m.
/// When `pixel` is given, bin delays use the distortion-corrected range.
SensingMatrix build_sensing_matrix(const DepthGrid& grid, const ModulationPlan& plan,
                                   const std::optional<PixelRef>& pixel = std::nullopt,
                                   AtomModel model = AtomModel::DutyCycleCorrelation);

/// Largest off-diagonal |<a_i, a_k>| over all column pairs of a
/// column-normalized matrix. Requires at least two columns.
double mutual_coherence(const SensingMatrix& A);

}  // namespace tofcs
