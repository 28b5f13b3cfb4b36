#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tofcs/types.hpp"

namespace tofcs {

/// Per-pixel depth image (mm) with a validity mask. Invalid pixels are
/// excluded from every metric.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;        // row-major, mm
    std::vector<std::uint8_t> valid;   // row-major, 0/1

    DepthMap() = default;
    DepthMap(int w, int h, double fill = 0.0, bool valid_fill = true)
        : width(w), height(h),
          values(static_cast<size_t>(w) * h, fill),
          valid(static_cast<size_t>(w) * h, valid_fill ? 1 : 0) {}

    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    double& at(int x, int y) { return values[index(x, y)]; }
    double at(int x, int y) const { return values[index(x, y)]; }
    bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
    void set(int x, int y, double v, bool ok = true) {
        values[index(x, y)] = v;
        valid[index(x, y)] = ok ? 1 : 0;
    }
    size_t size() const { return values.size(); }
};

/// Mean absolute error over the joint valid mask (Eq. form: mean |pred - truth|).
double mae(const DepthMap& pred, const DepthMap& truth);

/// Root mean square error over the joint valid mask.
double rmse(const DepthMap& pred, const DepthMap& truth);

/// Structural similarity with uniform square windows. A window contributes
/// when it lies fully inside the image and every pixel in it is jointly
/// valid. Local statistics are population moments over the window.
double ssim(const DepthMap& pred, const DepthMap& truth, int window, double c1, double c2);

/// SSIM with the project defaults: 7x7 windows, c1 = (0.01 R)^2,
/// c2 = (0.03 R)^2 where R is the depth span of the grid.
double ssim(const DepthMap& pred, const DepthMap& truth, const DepthGrid& grid);

/// Relative L2 reconstruction error in percent: 100 * ||g_hat - g|| / ||g||.
double recon_error_pct(const Eigen::VectorXcd& g_hat, const Eigen::VectorXcd& g_true);
double recon_error_pct(const Eigen::VectorXd& g_hat, const Eigen::VectorXd& g_true);

struct MetricsReport {
    std::string method;
    double mae_mm = 0.0;
    double rmse_mm = 0.0;
    double ssim_value = 0.0;
    long n_valid = 0;
};

/// Evaluate all three depth metrics over a prediction/truth pair.
MetricsReport evaluate_depth(const DepthMap& pred, const DepthMap& truth,
                             const DepthGrid& grid, const std::string& method = "");

}  // namespace tofcs
