#include "semplace/realism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace semplace {

bool Heightmap::locate(double x, double y, std::size_t& ix, std::size_t& iy) const {
    const double fx = (x - origin.x) / resolution;
    const double fy = (y - origin.y) / resolution;
    if (fx < 0.0 || fy < 0.0) return false;
    ix = static_cast<std::size_t>(fx);
    iy = static_cast<std::size_t>(fy);
    return inside(ix, iy);
}

double Heightmap::at(double x, double y) const {
    std::size_t ix, iy;
    if (!locate(x, y, ix, iy)) return kEmpty;
    return cell(ix, iy);
}

Heightmap build_heightmap(const PointCloud& points, const Point3& center, double radius,
                          double resolution) {
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    if (!(resolution > 0.0) || resolution > radius)
        throw std::invalid_argument("resolution must be in (0, radius]");
    Heightmap map;
    map.origin = {center.x - radius, center.y - radius, 0.0};
    map.resolution = resolution;
    map.nx = static_cast<std::size_t>(std::ceil(2.0 * radius / resolution)) + 1;
    map.ny = map.nx;
    map.max_z.assign(map.nx * map.ny, Heightmap::kEmpty);
    const double r2 = radius * radius;
    for (const Point3& p : points) {
        if ((p - center).squared_norm() > r2) continue;
        std::size_t ix, iy;
        if (!map.locate(p.x, p.y, ix, iy)) continue;
        double& z = map.cell(ix, iy);
        if (p.z > z) z = p.z;
    }
    return map;
}

Heightmap build_heightmap(const SegmentedScene& scene_without_query, const Point3& center,
                          double radius, double resolution) {
    PointCloud flat;
    flat.reserve(scene_without_query.total_points());
    for (const auto& [id, cloud] : scene_without_query.clouds)
        flat.insert(flat.end(), cloud.begin(), cloud.end());
    return build_heightmap(flat, center, radius, resolution);
}

RealismReport score_against_heightmap(const PointCloud& query_at_delta, const Heightmap& map,
                                      const RealismConfig& cfg) {
    if (query_at_delta.empty()) throw std::invalid_argument("empty query cloud");

    // Footprint: min query z per occupied cell.
    std::unordered_map<std::size_t, double> footprint;
    footprint.reserve(query_at_delta.size());
    double query_min_z = std::numeric_limits<double>::infinity();
    double penetration = 0.0;
    for (const Point3& p : query_at_delta) {
        query_min_z = std::min(query_min_z, p.z);
        std::size_t ix, iy;
        if (!map.locate(p.x, p.y, ix, iy)) continue;
        const std::size_t key = iy * map.nx + ix;
        auto [it, fresh] = footprint.try_emplace(key, p.z);
        if (!fresh && p.z < it->second) it->second = p.z;
        const double h = map.max_z[key];
        if (h > p.z) penetration = std::max(penetration, h - p.z);
    }

    RealismReport report;
    report.penetration_depth = penetration;
    report.support_gap = std::numeric_limits<double>::infinity();
    if (footprint.empty()) return report;  // nothing under the crop: score 0

    std::size_t supported = 0;
    std::size_t empty_cells = 0;
    double support_top = Heightmap::kEmpty;
    for (const auto& [key, min_z] : footprint) {
        const std::size_t ix = key % map.nx;
        const std::size_t iy = key / map.nx;
        const double own = map.max_z[key];
        if (own > support_top) support_top = own;
        // Best-matching support in the 3x3 neighborhood; the dilation absorbs
        // aliasing when a thin footprint straddles cell borders.
        double best_gap = std::numeric_limits<double>::infinity();
        bool any = false;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const std::size_t nx = ix + static_cast<std::size_t>(dx);
                const std::size_t ny = iy + static_cast<std::size_t>(dy);
                if (!map.inside(nx, ny)) continue;  // unsigned wrap covers < 0
                const double h = map.cell(nx, ny);
                if (h == Heightmap::kEmpty) continue;
                any = true;
                best_gap = std::min(best_gap, std::abs(min_z - h));
            }
        }
        if (!any) {
            ++empty_cells;
            continue;
        }
        if (best_gap <= cfg.gap_tol) ++supported;
    }

    if (support_top != Heightmap::kEmpty) report.support_gap = query_min_z - support_top;
    report.supported_fraction =
        static_cast<double>(supported) / static_cast<double>(footprint.size());
    if (empty_cells == footprint.size()) return report;  // floating over nothing
    if (penetration >= cfg.p_max) return report;
    report.score = report.supported_fraction * std::exp(-penetration / cfg.p_scale);
    return report;
}

RealismReport score_placement(const PointCloud& query_at_delta, const PointCloud& scene_points,
                              const RealismConfig& cfg) {
    if (query_at_delta.empty()) throw std::invalid_argument("empty query cloud");
    const Point3 center = centroid(query_at_delta);
    const Heightmap map = build_heightmap(scene_points, center, cfg.crop_radius, cfg.resolution);
    return score_against_heightmap(query_at_delta, map, cfg);
}

RealismReport score_placement(const PointCloud& query_at_delta,
                              const SegmentedScene& scene_without_query,
                              const RealismConfig& cfg) {
    PointCloud flat;
    flat.reserve(scene_without_query.total_points());
    for (const auto& [id, cloud] : scene_without_query.clouds)
        flat.insert(flat.end(), cloud.begin(), cloud.end());
    return score_placement(query_at_delta, flat, cfg);
}

PoseOffset sample_negative_offset(Rng& rng) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    const double mag = rng.uniform(0.02, 0.15);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return PoseOffset::make(mag * r * std::cos(phi), mag * r * std::sin(phi), mag * z, 0.0);
}

SegmentedScene make_negative(const SegmentedScene& scene, int query_id, Rng& rng) {
    if (!scene.has(query_id))
        throw std::out_of_range("unknown segment id " + std::to_string(query_id));
    return transform_scene(scene, query_id, sample_negative_offset(rng));
}

}  // namespace semplace
