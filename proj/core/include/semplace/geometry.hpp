#ifndef SEMPLACE_GEOMETRY_HPP
#define SEMPLACE_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace semplace {

/// World frame convention: z up, x right, y away from the camera,
/// all coordinates in meters.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Point3& operator+=(const Point3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }

    double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double squared_norm() const { return x * x + y * y + z * z; }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

inline double distance_xy(const Point3& a, const Point3& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

using PointCloud = std::vector<Point3>;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

/// Rigid pose offset applied to a query object: translation in meters plus a
/// planar (yaw) rotation in radians. The yaw is stored normalized to (-pi, pi].
struct PoseOffset {
    double dx = 0.0;
    double dy = 0.0;
    double dz = 0.0;
    double yaw = 0.0;

    static PoseOffset make(double dx, double dy, double dz, double yaw) {
        return {dx, dy, dz, normalize_angle(yaw)};
    }

    Point3 translation() const { return {dx, dy, dz}; }

    /// Offset that undoes this one when both rotate about the moving cloud's
    /// own centroid: reverse rotation, negated translation.
    PoseOffset inverse() const { return make(-dx, -dy, -dz, -yaw); }

    std::array<double, 4> as_array() const { return {dx, dy, dz, yaw}; }
    static PoseOffset from_array(const std::array<double, 4>& v) {
        return make(v[0], v[1], v[2], v[3]);
    }
};

struct Aabb {
    Point3 min;
    Point3 max;

    Point3 center() const { return (min + max) * 0.5; }
    Point3 extent() const { return max - min; }
    std::array<Point3, 8> corners() const;
};

/// Pinhole camera with a rigid world-to-camera transform: X_cam = R * X_world + t.
/// Image convention: u right, v down, origin at the top-left pixel corner.
struct CameraModel {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
    Point3 translation;

    Point3 world_to_camera(const Point3& p) const {
        const auto& r = rotation;
        return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation.x,
                r[3] * p.x + r[4] * p.y + r[5] * p.z + translation.y,
                r[6] * p.x + r[7] * p.y + r[8] * p.z + translation.z};
    }

    /// Pixel coordinates of a world point, or nullopt for non-positive depth.
    std::optional<std::array<double, 2>> project(const Point3& p) const;

    /// Camera center expressed in the world frame.
    Point3 position() const;

    /// World-frame direction of the ray through pixel (u, v).
    Point3 ray_direction(double u, double v) const;

    /// Throws std::invalid_argument if intrinsics are degenerate or the
    /// rotation is not orthonormal within 1e-9.
    void validate() const;
};

/// Camera from a world-to-camera unit quaternion (w, x, y, z) and translation.
CameraModel camera_from_quaternion(double fx, double fy, double cx, double cy, int width,
                                   int height, const std::array<double, 4>& q_wxyz,
                                   const Point3& t);

/// World-to-camera quaternion (w, x, y, z) of a camera model.
std::array<double, 4> camera_quaternion(const CameraModel& cam);

/// Camera placed at `eye` looking at `target`, image u axis aligned with the
/// horizontal component of world +x (v then points downward in the image).
CameraModel make_look_at_camera(double fx, double fy, int width, int height, const Point3& eye,
                                const Point3& target);

/// Segmented partial-view point cloud: the observable world state. Segment ids
/// are small non-negative integers; `background_id` marks non-object geometry
/// (table, fixture boxes).
struct SegmentedScene {
    std::map<int, PointCloud> clouds;
    int background_id = 0;
    CameraModel camera;

    bool has(int id) const { return clouds.count(id) != 0; }

    /// Throws std::out_of_range for an unknown id.
    const PointCloud& cloud(int id) const;

    std::size_t total_points() const;
    std::vector<int> object_ids() const;  // all segment ids except background
};

enum class RotationPivot {
    Centroid,  // yaw rotates about the cloud's own centroid (default)
    Origin,    // yaw rotates about the world origin
};

/// Arithmetic mean of the points. Throws std::invalid_argument on an empty cloud.
Point3 centroid(const PointCloud& cloud);

/// Applies a pose offset: yaw rotation about the pivot's vertical axis, then
/// translation. Rigid: point count and pairwise distances are preserved.
PointCloud apply_offset(const PointCloud& cloud, const PoseOffset& delta,
                        RotationPivot pivot = RotationPivot::Centroid);

/// Scene transition operator: returns a copy of the scene with only the query
/// segment replaced by its offset cloud. Throws on an unknown query id.
SegmentedScene transform_scene(const SegmentedScene& scene, int query_id, const PoseOffset& delta,
                               RotationPivot pivot = RotationPivot::Centroid);

/// Axis-aligned bounding box. Throws std::invalid_argument on an empty cloud.
Aabb compute_aabb(const PointCloud& cloud);

/// Keeps points within `radius` of `center`; empty segments are dropped.
SegmentedScene crop_sphere(const SegmentedScene& scene, const Point3& center, double radius);

/// True iff at least `min_fraction` of the points project inside the image
/// rectangle with positive depth.
bool in_view(const PointCloud& cloud, const CameraModel& camera, double min_fraction = 0.95);

/// Exact minimum pairwise distance, brute force. Throws on empty input.
double min_distance(const PointCloud& a, const PointCloud& b);

/// Exact minimum pairwise distance through a voxel-grid index. Same result as
/// min_distance; faster for large clouds.
double min_distance_grid(const PointCloud& a, const PointCloud& b);

/// Uniform voxel hash over a fixed point set, for repeated proximity queries
/// against the same cloud (anchor-side predicate checks during planning).
class VoxelIndex {
  public:
    VoxelIndex() = default;
    VoxelIndex(const PointCloud& cloud, double cell_size);

    bool empty() const { return points_.empty(); }
    double cell_size() const { return cell_; }

    /// True iff some indexed point lies within `radius` of `p`.
    /// Exact for radius <= cell_size.
    bool any_within(const Point3& p, double radius) const;

    /// Distance from `p` to the nearest indexed point, capped: returns a value
    /// > `max_radius` (not the true distance) when nothing lies within it.
    double nearest_within(const Point3& p, double max_radius) const;

  private:
    std::array<std::int64_t, 3> cell_of(const Point3& p) const;

    std::vector<Point3> points_;
    std::vector<std::uint32_t> order_;          // point indices grouped by cell
    std::vector<std::uint32_t> bucket_start_;   // offsets into order_, per cell
    std::vector<std::uint64_t> bucket_key_;     // sorted cell hashes
    double cell_ = 0.0;
};

/// True iff min_distance(a, b) <= threshold, computed with early exit.
bool within_distance(const PointCloud& a, const PointCloud& b, double threshold);
bool within_distance(const PointCloud& a, const VoxelIndex& b_index, double threshold);

}  // namespace semplace

#endif  // SEMPLACE_GEOMETRY_HPP
