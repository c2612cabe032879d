#ifndef SEMPLACE_SCENE_FORGE_HPP
#define SEMPLACE_SCENE_FORGE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "semplace/geometry.hpp"
#include "semplace/predicates.hpp"
#include "semplace/rng.hpp"

namespace semplace {

/// Upright solid primitive: a yawed box or a vertical cylinder. `position` is
/// the volume center; yaw rotates about the vertical axis through it.
struct Primitive {
    enum class Shape { Box, Cylinder };

    int id = 0;
    Shape shape = Shape::Box;
    double dx = 0.0, dy = 0.0, dz = 0.0;  // box full extents
    double radius = 0.0, height = 0.0;    // cylinder
    Point3 position;
    double yaw = 0.0;

    static Primitive box(int id, double dx, double dy, double dz, Point3 pos, double yaw);
    static Primitive cylinder(int id, double radius, double height, Point3 pos, double yaw);

    double half_height() const;
    double top() const { return position.z + half_height(); }
    double bottom() const { return position.z - half_height(); }

    /// World-axis bounding box of the (yawed) solid.
    Aabb aabb() const;

    /// Footprint outline in the xy plane, counter-clockwise. Boxes yield their
    /// 4 corners; cylinders are approximated by an inscribed `segments`-gon.
    std::vector<std::array<double, 2>> footprint(int segments = 64) const;

    /// True iff the point lies inside the solid (closed).
    bool contains(const Point3& p) const;

    /// Nearest-hit ray parameter against the solid's surface, or a negative
    /// value when the ray misses. `dir` need not be unit length.
    double ray_hit(const Point3& origin, const Point3& dir) const;

    /// Throws std::invalid_argument on non-positive dimensions or a
    /// non-finite pose.
    void validate() const;
};

/// Exact-geometry scene: the generator/oracle-side state.
struct GroundTruthScene {
    std::vector<Primitive> primitives;  // movable objects, unique positive ids
    std::vector<Primitive> obstacles;   // static fixtures, rendered as background
    double table_z = 0.0;
    double table_min_x = -0.6, table_min_y = -0.4;
    double table_max_x = 0.6, table_max_y = 0.4;
    CameraModel camera;

    bool has(int id) const;
    const Primitive& primitive(int id) const;  // throws std::out_of_range
    Primitive& primitive(int id);
};

struct ForgeConfig {
    int min_objects = 3;
    int max_objects = 7;
    double min_edge = 0.04;    // box edges and cylinder diameters, meters
    double max_edge = 0.20;
    double min_height = 0.04;
    double max_height = 0.25;
    double cylinder_prob = 0.3;

    double table_half_x = 0.6;
    double table_half_y = 0.4;
    double table_z = 0.0;

    /// Probability that a new object is aimed at the top of an existing one
    /// instead of a uniform table position, so stacks appear.
    double stack_bias = 0.15;

    int obstacle_count = 0;  // open-top fixture boxes dropped on the table
    int max_place_attempts = 50;

    /// Camera placement: distance from the table center at 45 deg elevation.
    double camera_distance = 1.0;
    double camera_fx = 280.0;
    int image_width = 320;
    int image_height = 240;
};

struct StabilityReport {
    double displacement = 0.0;  // meters the center moved while settling
    Point3 settled_position;
    double settled_yaw = 0.0;
    bool supported = false;
};

/// Objects fall 0.75 m below the table surface when they slide off it.
inline constexpr double kFloorDrop = 0.75;

/// Displacement threshold for a "stable pose".
inline constexpr double kStableDisplacement = 0.05;

/// Drops random primitives one at a time onto the table, settling each and
/// resampling unsupported placements (up to max_place_attempts per object).
/// Throws std::runtime_error("could not generate stable scene") when an
/// object exhausts its budget. Deterministic for a fixed rng state.
GroundTruthScene generate_scene(Rng& rng, const ForgeConfig& cfg = {});

/// Quasi-static settle of one object against everything else: the object's
/// bottom moves to the highest support top under its footprint (table,
/// obstacles, other primitives); it is supported iff its center of mass lies
/// in the convex hull of the contact patch. Unsupported objects topple once:
/// the center slides to the nearest hull edge and drops to the next support
/// strictly below (the floor when none). Throws on an unknown id.
StabilityReport settle(const GroundTruthScene& scene, int object_id);

/// Applies the offset to the ground-truth primitive (rotation about its own
/// center), settles, and reports. Stable iff displacement < 0.05 m.
StabilityReport evaluate_placement(const GroundTruthScene& scene, int query_id,
                                   const PoseOffset& delta);

/// Casts one ray per pixel and keeps the nearest surface hit: an
/// occlusion-correct partial-view cloud. Table and obstacle hits carry the
/// background id; primitive hits carry their own ids.
SegmentedScene render_cloud(const GroundTruthScene& scene);

/// Renders the scene with every movable primitive except `object_id` removed,
/// so the object is occluded only by itself and the fixtures.
SegmentedScene render_object_unoccluded(const GroundTruthScene& scene, int object_id);

/// Full-surface sample clouds (no camera, no occlusion): every primitive
/// face, obstacle face, and the table top sampled on a `spacing` grid. The
/// oracle-side corpus representation for planning tests.
SegmentedScene sample_surfaces(const GroundTruthScene& scene, double spacing = 0.008);

/// Thresholds used when labeling exact primitives (tighter than the
/// cloud-side evaluation thresholds).
struct LabelConfig {
    DirectionalConfig directional;
    double touching_threshold = 0.001;  // meters, exact surface distance
    double near_threshold = 0.05;
    double centered_threshold = 0.001;
    double aligned_threshold = M_PI / 20;  // dataset-side extra, kept out of the vector
};

/// Ground-truth labels from exact primitive geometry: directional rules on
/// true bounding boxes and centers, touching/near on exact surface distance,
/// centered on true center xy distance.
PredicateVector label_predicates(const GroundTruthScene& scene, int query_id, int anchor_id,
                                 const LabelConfig& cfg = {});

/// Yaw agreement within the aligned threshold; cylinders align with anything.
bool label_aligned(const GroundTruthScene& scene, int query_id, int anchor_id,
                   const LabelConfig& cfg = {});

/// Exact minimum distance between two primitive surfaces (0 when
/// interpenetrating). Exposed for tests.
double primitive_distance(const Primitive& a, const Primitive& b);

/// Ground-truth scene text format: '#' comments plus lines
///   camera fx fy cx cy width height qw qx qy qz tx ty tz
///   table min_x min_y max_x max_y z
///   obstacle dx dy dz px py pz yaw
///   <id> box dx dy dz px py pz yaw
///   <id> cylinder radius height px py pz yaw
GroundTruthScene read_ground_truth(std::istream& in);
GroundTruthScene load_ground_truth(const std::string& path);
void write_ground_truth(const GroundTruthScene& scene, std::ostream& out);
void save_ground_truth(const GroundTruthScene& scene, const std::string& path);

}  // namespace semplace

#endif  // SEMPLACE_SCENE_FORGE_HPP
