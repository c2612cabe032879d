#ifndef SEMPLACE_REALISM_HPP
#define SEMPLACE_REALISM_HPP

#include <cstddef>
#include <limits>
#include <vector>

#include "semplace/geometry.hpp"
#include "semplace/rng.hpp"

namespace semplace {

/// 2.5D max-z grid over a square crop of the scene. Cells that saw no point
/// hold -infinity.
struct Heightmap {
    Point3 origin;            // world xy of the corner of cell (0,0)
    double resolution = 0.0;  // meters per cell
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> max_z;

    static constexpr double kEmpty = -std::numeric_limits<double>::infinity();

    bool inside(std::size_t ix, std::size_t iy) const { return ix < nx && iy < ny; }
    double cell(std::size_t ix, std::size_t iy) const { return max_z[iy * nx + ix]; }
    double& cell(std::size_t ix, std::size_t iy) { return max_z[iy * nx + ix]; }

    /// Cell index of a world xy position; false when outside the grid.
    bool locate(double x, double y, std::size_t& ix, std::size_t& iy) const;

    /// Max z at a world xy position, kEmpty outside the grid.
    double at(double x, double y) const;
};

struct RealismConfig {
    double resolution = 0.01;   // meters per heightmap cell
    double gap_tol = 0.01;      // |support gap| below this counts as supported
    double p_scale = 0.01;      // penetration decay scale in the score
    double p_max = 0.03;        // hard penetration cutoff: score 0 at or above
    double crop_radius = 0.5;   // heightmap extent around the query centroid
};

struct RealismReport {
    double score = 0.0;               // [0,1]
    double support_gap = 0.0;         // query bottom minus support top, signed
    double penetration_depth = 0.0;   // meters, >= 0
    double supported_fraction = 0.0;  // footprint cells with support in tolerance
};

/// Fills the grid with the max z of points whose xy falls in each cell,
/// restricted to the crop sphere around `center`. The grid spans
/// [center - radius, center + radius] in x and y.
Heightmap build_heightmap(const SegmentedScene& scene_without_query, const Point3& center,
                          double radius, double resolution);
Heightmap build_heightmap(const PointCloud& points, const Point3& center, double radius,
                          double resolution);

/// Scene-realism score f of a candidate placement. `scene_without_query`
/// must exclude the query's own points so the query cannot support itself.
///
/// Footprint cells are the heightmap cells containing at least one query
/// point's xy. Per footprint cell the support gap is the query's min z in the
/// cell minus the best-matching support height in the cell's 3x3 neighborhood
/// (the dilation absorbs grid aliasing for thin or edge-aligned objects);
/// supported_fraction is the fraction of footprint cells with |gap| <=
/// gap_tol. Penetration is the deepest query point below the max-z surface at
/// its own cell. score = supported_fraction * exp(-p / p_scale), hard 0 when
/// p >= p_max or when every footprint cell is empty.
RealismReport score_placement(const PointCloud& query_at_delta,
                              const SegmentedScene& scene_without_query,
                              const RealismConfig& cfg = {});
RealismReport score_placement(const PointCloud& query_at_delta, const PointCloud& scene_points,
                              const RealismConfig& cfg);

/// Score against a prebuilt heightmap (the planner's batch path). The
/// heightmap must cover the query footprint and stem from the same scene.
RealismReport score_against_heightmap(const PointCloud& query_at_delta, const Heightmap& map,
                                      const RealismConfig& cfg);

/// Negative-sample construction: the query displaced along a uniformly random
/// 3D direction by a magnitude uniform in [0.02, 0.15] m.
SegmentedScene make_negative(const SegmentedScene& scene, int query_id, Rng& rng);
PoseOffset sample_negative_offset(Rng& rng);

}  // namespace semplace

#endif  // SEMPLACE_REALISM_HPP
