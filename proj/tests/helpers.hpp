#ifndef SEMPLACE_TESTS_HELPERS_HPP
#define SEMPLACE_TESTS_HELPERS_HPP

#include <cmath>

#include "semplace/geometry.hpp"
#include "semplace/rng.hpp"

namespace semplace::testing {

/// Inclusive grid over the six faces of an axis-aligned box.
inline PointCloud box_cloud(const Point3& center, double ex, double ey, double ez,
                            double spacing) {
    const auto steps = [&](double len) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(len / spacing)));
    };
    const std::size_t nx = steps(ex), ny = steps(ey), nz = steps(ez);
    PointCloud cloud;
    const double hx = ex / 2, hy = ey / 2, hz = ez / 2;
    for (std::size_t i = 0; i <= nx; ++i) {
        const double x = -hx + ex * i / nx;
        for (std::size_t j = 0; j <= ny; ++j) {
            const double y = -hy + ey * j / ny;
            cloud.push_back({center.x + x, center.y + y, center.z - hz});
            cloud.push_back({center.x + x, center.y + y, center.z + hz});
        }
        for (std::size_t k = 1; k + 1 <= nz; ++k) {
            const double z = -hz + ez * k / nz;
            cloud.push_back({center.x + x, center.y - hy, center.z + z});
            cloud.push_back({center.x + x, center.y + hy, center.z + z});
        }
    }
    for (std::size_t j = 1; j + 1 <= ny; ++j) {
        const double y = -hy + ey * j / ny;
        for (std::size_t k = 1; k + 1 <= nz; ++k) {
            const double z = -hz + ez * k / nz;
            cloud.push_back({center.x - hx, center.y + y, center.z + z});
            cloud.push_back({center.x + hx, center.y + y, center.z + z});
        }
    }
    return cloud;
}

/// Horizontal rectangle of points at height z.
inline PointCloud plane_cloud(double x0, double x1, double y0, double y1, double z,
                              double spacing) {
    PointCloud cloud;
    const auto steps = [&](double len) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(len / spacing)));
    };
    const std::size_t nx = steps(x1 - x0), ny = steps(y1 - y0);
    for (std::size_t i = 0; i <= nx; ++i)
        for (std::size_t j = 0; j <= ny; ++j)
            cloud.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny, z});
    return cloud;
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, const Point3& center, double extent) {
    PointCloud cloud;
    cloud.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        cloud.push_back({center.x + rng.uniform(-extent, extent),
                         center.y + rng.uniform(-extent, extent),
                         center.z + rng.uniform(-extent, extent)});
    return cloud;
}

/// Camera a meter away at 45 degrees looking at the origin, wide enough to
/// see a tabletop.
inline CameraModel test_camera() {
    return make_look_at_camera(280.0, 280.0, 320, 240, {0.0, -0.7071, 0.7071}, {0.0, 0.0, 0.0});
}

/// Table plane (id 0) plus a query box (id 1) and an anchor box (id 2)
/// resting on it, with a camera attached.
inline SegmentedScene two_box_scene(double spacing = 0.01) {
    SegmentedScene scene;
    scene.background_id = 0;
    scene.camera = test_camera();
    scene.clouds[0] = plane_cloud(-0.5, 0.5, -0.35, 0.35, 0.0, spacing);
    scene.clouds[1] = box_cloud({-0.15, 0.0, 0.04}, 0.08, 0.08, 0.08, spacing);
    scene.clouds[2] = box_cloud({0.1, 0.05, 0.05}, 0.1, 0.1, 0.1, spacing);
    return scene;
}

}  // namespace semplace::testing

#endif  // SEMPLACE_TESTS_HELPERS_HPP
