#include "semplace/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace semplace {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

std::uint64_t mix_cell(std::int64_t ix, std::int64_t iy, std::int64_t iz) {
    // FNV-style mix of the three signed cell coordinates.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t v : {ix, iy, iz}) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 0x100000001b3ULL;
        h ^= h >> 29;
    }
    return h;
}

}  // namespace

double normalize_angle(double radians) {
    double r = std::remainder(radians, kTwoPi);
    if (r <= -M_PI) r += kTwoPi;
    return r;
}

std::array<Point3, 8> Aabb::corners() const {
    return {Point3{min.x, min.y, min.z}, Point3{max.x, min.y, min.z},
            Point3{min.x, max.y, min.z}, Point3{max.x, max.y, min.z},
            Point3{min.x, min.y, max.z}, Point3{max.x, min.y, max.z},
            Point3{min.x, max.y, max.z}, Point3{max.x, max.y, max.z}};
}

std::optional<std::array<double, 2>> CameraModel::project(const Point3& p) const {
    const Point3 pc = world_to_camera(p);
    if (pc.z <= 0.0) return std::nullopt;
    return std::array<double, 2>{fx * pc.x / pc.z + cx, fy * pc.y / pc.z + cy};
}

Point3 CameraModel::position() const {
    // C = -R^T t
    const auto& r = rotation;
    const Point3& t = translation;
    return {-(r[0] * t.x + r[3] * t.y + r[6] * t.z),
            -(r[1] * t.x + r[4] * t.y + r[7] * t.z),
            -(r[2] * t.x + r[5] * t.y + r[8] * t.z)};
}

Point3 CameraModel::ray_direction(double u, double v) const {
    const Point3 dir_cam{(u - cx) / fx, (v - cy) / fy, 1.0};
    const auto& r = rotation;
    // R^T * dir_cam
    Point3 d{r[0] * dir_cam.x + r[3] * dir_cam.y + r[6] * dir_cam.z,
             r[1] * dir_cam.x + r[4] * dir_cam.y + r[7] * dir_cam.z,
             r[2] * dir_cam.x + r[5] * dir_cam.y + r[8] * dir_cam.z};
    const double n = d.norm();
    return {d.x / n, d.y / n, d.z / n};
}

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("camera image size must be positive");
    const auto& r = rotation;
    // R * R^T must equal identity within 1e-9.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += r[3 * i + k] * r[3 * j + k];
            const double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(dot - expect) > 1e-9)
                throw std::invalid_argument("camera rotation is not orthonormal");
        }
    }
}

CameraModel camera_from_quaternion(double fx, double fy, double cx, double cy, int width,
                                   int height, const std::array<double, 4>& q, const Point3& t) {
    const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (!(n > 0.0)) throw std::invalid_argument("zero quaternion");
    const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
    CameraModel cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = cx;
    cam.cy = cy;
    cam.width = width;
    cam.height = height;
    cam.rotation = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
                    2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
                    2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
    cam.translation = t;
    cam.validate();
    return cam;
}

std::array<double, 4> camera_quaternion(const CameraModel& cam) {
    const auto& r = cam.rotation;
    const double trace = r[0] + r[4] + r[8];
    double w, x, y, z;
    if (trace > 0.0) {
        const double s = std::sqrt(trace + 1.0) * 2.0;
        w = 0.25 * s;
        x = (r[7] - r[5]) / s;
        y = (r[2] - r[6]) / s;
        z = (r[3] - r[1]) / s;
    } else if (r[0] > r[4] && r[0] > r[8]) {
        const double s = std::sqrt(1.0 + r[0] - r[4] - r[8]) * 2.0;
        w = (r[7] - r[5]) / s;
        x = 0.25 * s;
        y = (r[1] + r[3]) / s;
        z = (r[2] + r[6]) / s;
    } else if (r[4] > r[8]) {
        const double s = std::sqrt(1.0 + r[4] - r[0] - r[8]) * 2.0;
        w = (r[2] - r[6]) / s;
        x = (r[1] + r[3]) / s;
        y = 0.25 * s;
        z = (r[5] + r[7]) / s;
    } else {
        const double s = std::sqrt(1.0 + r[8] - r[0] - r[4]) * 2.0;
        w = (r[3] - r[1]) / s;
        x = (r[2] + r[6]) / s;
        y = (r[5] + r[7]) / s;
        z = 0.25 * s;
    }
    if (w < 0.0) {
        w = -w;
        x = -x;
        y = -y;
        z = -z;
    }
    return {w, x, y, z};
}

CameraModel make_look_at_camera(double fx, double fy, int width, int height, const Point3& eye,
                                const Point3& target) {
    const Point3 fwd_raw = target - eye;
    const double fn = fwd_raw.norm();
    if (!(fn > 0.0)) throw std::invalid_argument("camera eye coincides with target");
    const Point3 fwd{fwd_raw.x / fn, fwd_raw.y / fn, fwd_raw.z / fn};

    // Image x axis: forward x world-up, so u stays horizontal.
    Point3 right{fwd.y * 1.0 - fwd.z * 0.0, fwd.z * 0.0 - fwd.x * 1.0, fwd.x * 0.0 - fwd.y * 0.0};
    const double rn = right.norm();
    if (rn < 1e-12) throw std::invalid_argument("camera looking straight along world z");
    right = right * (1.0 / rn);
    // Image y axis (v down): forward x right.
    const Point3 down{fwd.y * right.z - fwd.z * right.y, fwd.z * right.x - fwd.x * right.z,
                      fwd.x * right.y - fwd.y * right.x};

    CameraModel cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    cam.width = width;
    cam.height = height;
    cam.rotation = {right.x, right.y, right.z, down.x, down.y, down.z, fwd.x, fwd.y, fwd.z};
    cam.translation = {-(right.x * eye.x + right.y * eye.y + right.z * eye.z),
                       -(down.x * eye.x + down.y * eye.y + down.z * eye.z),
                       -(fwd.x * eye.x + fwd.y * eye.y + fwd.z * eye.z)};
    cam.validate();
    return cam;
}

const PointCloud& SegmentedScene::cloud(int id) const {
    auto it = clouds.find(id);
    if (it == clouds.end()) throw std::out_of_range("unknown segment id " + std::to_string(id));
    return it->second;
}

std::size_t SegmentedScene::total_points() const {
    std::size_t n = 0;
    for (const auto& [id, cloud] : clouds) n += cloud.size();
    return n;
}

std::vector<int> SegmentedScene::object_ids() const {
    std::vector<int> ids;
    for (const auto& [id, cloud] : clouds)
        if (id != background_id) ids.push_back(id);
    return ids;
}

Point3 centroid(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("empty point cloud");
    Point3 sum;
    for (const Point3& p : cloud) sum += p;
    return sum * (1.0 / static_cast<double>(cloud.size()));
}

PointCloud apply_offset(const PointCloud& cloud, const PoseOffset& delta, RotationPivot pivot) {
    if (cloud.empty()) throw std::invalid_argument("empty point cloud");
    const Point3 c = pivot == RotationPivot::Centroid ? centroid(cloud) : Point3{};
    const double cs = std::cos(delta.yaw);
    const double sn = std::sin(delta.yaw);
    PointCloud out;
    out.reserve(cloud.size());
    for (const Point3& p : cloud) {
        const double rx = p.x - c.x;
        const double ry = p.y - c.y;
        out.push_back({c.x + cs * rx - sn * ry + delta.dx, c.y + sn * rx + cs * ry + delta.dy,
                       p.z + delta.dz});
    }
    return out;
}

SegmentedScene transform_scene(const SegmentedScene& scene, int query_id, const PoseOffset& delta,
                               RotationPivot pivot) {
    auto it = scene.clouds.find(query_id);
    if (it == scene.clouds.end())
        throw std::out_of_range("unknown query id " + std::to_string(query_id));
    SegmentedScene out = scene;
    out.clouds[query_id] = apply_offset(it->second, delta, pivot);
    return out;
}

Aabb compute_aabb(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("empty point cloud");
    Aabb box{cloud.front(), cloud.front()};
    for (const Point3& p : cloud) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.min.z = std::min(box.min.z, p.z);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
        box.max.z = std::max(box.max.z, p.z);
    }
    return box;
}

SegmentedScene crop_sphere(const SegmentedScene& scene, const Point3& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("crop radius must be positive");
    const double r2 = radius * radius;
    SegmentedScene out;
    out.background_id = scene.background_id;
    out.camera = scene.camera;
    for (const auto& [id, cloud] : scene.clouds) {
        PointCloud kept;
        for (const Point3& p : cloud)
            if ((p - center).squared_norm() <= r2) kept.push_back(p);
        if (!kept.empty()) out.clouds.emplace(id, std::move(kept));
    }
    return out;
}

bool in_view(const PointCloud& cloud, const CameraModel& camera, double min_fraction) {
    if (cloud.empty()) return false;
    std::size_t inside = 0;
    for (const Point3& p : cloud) {
        const auto uv = camera.project(p);
        if (!uv) continue;
        const double u = (*uv)[0];
        const double v = (*uv)[1];
        if (u >= 0.0 && u < camera.width && v >= 0.0 && v < camera.height) ++inside;
    }
    return static_cast<double>(inside) >=
           min_fraction * static_cast<double>(cloud.size()) - 1e-12;
}

double min_distance(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty point cloud");
    double best = std::numeric_limits<double>::infinity();
    for (const Point3& pa : a) {
        for (const Point3& pb : b) {
            const double d2 = (pa - pb).squared_norm();
            if (d2 < best) best = d2;
        }
    }
    return std::sqrt(best);
}

VoxelIndex::VoxelIndex(const PointCloud& cloud, double cell_size) : points_(cloud), cell_(cell_size) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("cell size must be positive");
    std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto c = cell_of(points_[i]);
        keyed[i] = {mix_cell(c[0], c[1], c[2]), static_cast<std::uint32_t>(i)};
    }
    std::sort(keyed.begin(), keyed.end());
    order_.resize(points_.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) order_[i] = keyed[i].second;
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (i == 0 || keyed[i].first != keyed[i - 1].first) {
            bucket_key_.push_back(keyed[i].first);
            bucket_start_.push_back(static_cast<std::uint32_t>(i));
        }
    }
    bucket_start_.push_back(static_cast<std::uint32_t>(keyed.size()));
}

std::array<std::int64_t, 3> VoxelIndex::cell_of(const Point3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_)),
            static_cast<std::int64_t>(std::floor(p.y / cell_)),
            static_cast<std::int64_t>(std::floor(p.z / cell_))};
}

bool VoxelIndex::any_within(const Point3& p, double radius) const {
    if (points_.empty()) return false;
    const double r2 = radius * radius;
    const int reach = static_cast<int>(std::ceil(radius / cell_));
    const auto base = cell_of(p);
    for (int dx = -reach; dx <= reach; ++dx) {
        for (int dy = -reach; dy <= reach; ++dy) {
            for (int dz = -reach; dz <= reach; ++dz) {
                const std::uint64_t key = mix_cell(base[0] + dx, base[1] + dy, base[2] + dz);
                const auto it = std::lower_bound(bucket_key_.begin(), bucket_key_.end(), key);
                if (it == bucket_key_.end() || *it != key) continue;
                const std::size_t bi = static_cast<std::size_t>(it - bucket_key_.begin());
                for (std::uint32_t k = bucket_start_[bi]; k < bucket_start_[bi + 1]; ++k)
                    if ((points_[order_[k]] - p).squared_norm() <= r2) return true;
            }
        }
    }
    return false;
}

double VoxelIndex::nearest_within(const Point3& p, double max_radius) const {
    if (points_.empty()) return max_radius * 2.0 + 1.0;
    double best2 = std::numeric_limits<double>::infinity();
    const auto base = cell_of(p);
    const int max_reach = static_cast<int>(std::ceil(max_radius / cell_)) + 1;
    for (int reach = 0; reach <= max_reach; ++reach) {
        // Shell lower bound: any point in a cell at Chebyshev distance `reach`
        // is at least (reach - 1) * cell_ away.
        const double shell_lb = reach > 0 ? (reach - 1) * cell_ : 0.0;
        if (shell_lb * shell_lb > best2 || shell_lb > max_radius) break;
        for (int dx = -reach; dx <= reach; ++dx) {
            for (int dy = -reach; dy <= reach; ++dy) {
                for (int dz = -reach; dz <= reach; ++dz) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != reach) continue;
                    const std::uint64_t key = mix_cell(base[0] + dx, base[1] + dy, base[2] + dz);
                    const auto it = std::lower_bound(bucket_key_.begin(), bucket_key_.end(), key);
                    if (it == bucket_key_.end() || *it != key) continue;
                    const std::size_t bi = static_cast<std::size_t>(it - bucket_key_.begin());
                    for (std::uint32_t k = bucket_start_[bi]; k < bucket_start_[bi + 1]; ++k) {
                        const double d2 = (points_[order_[k]] - p).squared_norm();
                        if (d2 < best2) best2 = d2;
                    }
                }
            }
        }
    }
    const double d = std::sqrt(best2);
    return d <= max_radius ? d : max_radius * 2.0 + 1.0;
}

double min_distance_grid(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty point cloud");
    const Aabb box_a = compute_aabb(a);
    const Aabb box_b = compute_aabb(b);
    // Upper bound on the answer: distance between one arbitrary pair.
    double upper = distance(a.front(), b.front());
    const Point3 span = box_b.extent();
    const double diag = std::max({span.x, span.y, span.z, 1e-3});
    const double cell = std::max(diag / std::cbrt(static_cast<double>(b.size())), 1e-4);
    const VoxelIndex index(b, cell);
    double best = upper;
    (void)box_a;
    for (const Point3& p : a) {
        const double d = index.nearest_within(p, best);
        if (d < best) best = d;
        if (best == 0.0) break;
    }
    return best;
}

bool within_distance(const PointCloud& a, const PointCloud& b, double threshold) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty point cloud");
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    const VoxelIndex index(b, threshold);
    return within_distance(a, index, threshold);
}

bool within_distance(const PointCloud& a, const VoxelIndex& b_index, double threshold) {
    if (a.empty() || b_index.empty()) throw std::invalid_argument("empty point cloud");
    for (const Point3& p : a)
        if (b_index.any_within(p, threshold)) return true;
    return false;
}

}  // namespace semplace
