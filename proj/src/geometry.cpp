#include "tofcs/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tofcs/sensing.hpp"

namespace tofcs {

double radial_to_axial(double range_mm, double x, double y) {
    if (range_mm <= 0.0) throw std::invalid_argument("radial_to_axial: range must be > 0");
    return range_mm / std::sqrt(1.0 + x * x + y * y);
}

PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& intrinsics) {
    intrinsics.validate();
    if (depth.width != intrinsics.width || depth.height != intrinsics.height)
        throw std::invalid_argument("backproject: depth map does not match intrinsics");

    PointCloud cloud;
    cloud.points.reserve(depth.size());
    cloud.source_pixels.reserve(depth.size());
    bool any = false;
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            if (!depth.is_valid(u, v)) continue;
            const double d = depth.at(u, v);
            if (!(d > 0.0) || !std::isfinite(d))
                throw std::invalid_argument("backproject: valid pixel with non-positive depth");
            auto [x, y] = normalized_coords(u, v, intrinsics);
            cloud.points.push_back({x * d, y * d, d});
            cloud.source_pixels.emplace_back(u, v);
            any = true;
        }
    }
    if (!any) throw std::invalid_argument("backproject: empty valid mask");
    return cloud;
}

std::pair<double, double> project(const std::array<double, 3>& point,
                                  const CameraIntrinsics& intrinsics) {
    if (point[2] <= 0.0) throw std::invalid_argument("project: point behind the camera");
    return {intrinsics.cx + intrinsics.fx * point[0] / point[2],
            intrinsics.cy + intrinsics.fy * point[1] / point[2]};
}

void write_ply(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_ply: cannot open " + path);
    out << "ply\nformat ascii 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "end_header\n";
    char line[96];
    for (const auto& p : cloud.points) {
        std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n",
                      static_cast<double>(static_cast<float>(p[0])),
                      static_cast<double>(static_cast<float>(p[1])),
                      static_cast<double>(static_cast<float>(p[2])));
        out << line;
    }
    if (!out) throw std::runtime_error("write_ply: write failed for " + path);
}

void write_point_csv(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_point_csv: cannot open " + path);
    const bool with_pixels = cloud.source_pixels.size() == cloud.points.size();
    out << (with_pixels ? "x,y,z,u,v\n" : "x,y,z\n");
    char line[128];
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        if (with_pixels)
            std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%d,%d\n", p[0], p[1], p[2],
                          cloud.source_pixels[i].first, cloud.source_pixels[i].second);
        else
            std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g\n", p[0], p[1], p[2]);
        out << line;
    }
    if (!out) throw std::runtime_error("write_point_csv: write failed for " + path);
}

}  // namespace tofcs
