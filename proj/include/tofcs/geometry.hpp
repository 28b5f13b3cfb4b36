#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tofcs/metrics.hpp"
#include "tofcs/types.hpp"

namespace tofcs {

/// 3D points in the camera frame (mm, Z along the optical axis).
struct PointCloud {
    std::vector<std::array<double, 3>> points;
    std::vector<std::pair<int, int>> source_pixels;  // parallel to points

    size_t size() const { return points.size(); }
};

/// Convert a radial (travel-path) range to axial depth:
/// d = r / sqrt(1 + x^2 + y^2). Inverse of corrected_range.
double radial_to_axial(double range_mm, double x, double y);

/// Back-project a valid axial DepthMap through the pinhole model:
/// X = x d, Y = y d, Z = d per valid pixel.
PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& intrinsics);

/// Project a camera-frame point back to pixel coordinates (u, v).
std::pair<double, double> project(const std::array<double, 3>& point,
                                  const CameraIntrinsics& intrinsics);

/// ASCII PLY export (element vertex; properties x, y, z as float32).
void write_ply(const std::string& path, const PointCloud& cloud);

/// CSV export with header x,y,z[,u,v].
void write_point_csv(const std::string& path, const PointCloud& cloud);

}  // namespace tofcs
