#include "semplace/scene_forge.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace semplace {

namespace {

using Pt2 = std::array<double, 2>;
using Poly = std::vector<Pt2>;

double cross2(const Pt2& o, const Pt2& a, const Pt2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double poly_area(const Poly& p) {
    if (p.size() < 3) return 0.0;
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Pt2& u = p[i];
        const Pt2& v = p[(i + 1) % p.size()];
        a += u[0] * v[1] - v[0] * u[1];
    }
    return 0.5 * std::abs(a);
}

Pt2 segment_intersection(const Pt2& a, const Pt2& b, const Pt2& c, const Pt2& d) {
    const double a1 = b[1] - a[1];
    const double b1 = a[0] - b[0];
    const double c1 = a1 * a[0] + b1 * a[1];
    const double a2 = d[1] - c[1];
    const double b2 = c[0] - d[0];
    const double c2 = a2 * c[0] + b2 * c[1];
    const double det = a1 * b2 - a2 * b1;
    if (std::abs(det) < 1e-15) return a;  // parallel; caller guards
    return {(b2 * c1 - b1 * c2) / det, (a1 * c2 - a2 * c1) / det};
}

/// Sutherland-Hodgman: subject clipped by a convex CCW polygon.
Poly clip_convex(Poly subject, const Poly& clip) {
    if (clip.size() < 3) return {};
    for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
        const Pt2& c1 = clip[i];
        const Pt2& c2 = clip[(i + 1) % clip.size()];
        Poly input;
        input.swap(subject);
        for (std::size_t j = 0; j < input.size(); ++j) {
            const Pt2& s1 = input[j];
            const Pt2& s2 = input[(j + 1) % input.size()];
            const bool in1 = cross2(c1, c2, s1) >= 0.0;
            const bool in2 = cross2(c1, c2, s2) >= 0.0;
            if (in2) {
                if (!in1) subject.push_back(segment_intersection(s1, s2, c1, c2));
                subject.push_back(s2);
            } else if (in1) {
                subject.push_back(segment_intersection(s1, s2, c1, c2));
            }
        }
    }
    return subject;
}

Poly convex_hull(std::vector<Pt2> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    Poly hull(2 * pts.size());
    std::size_t k = 0;
    for (const Pt2& p : pts) {  // lower
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {  // upper
        const Pt2& p = pts[i];
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    return hull;
}

double point_segment_distance(const Pt2& p, const Pt2& a, const Pt2& b) {
    const double vx = b[0] - a[0];
    const double vy = b[1] - a[1];
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0)
        t = std::clamp(((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2, 0.0, 1.0);
    const double dx = p[0] - (a[0] + t * vx);
    const double dy = p[1] - (a[1] + t * vy);
    return std::hypot(dx, dy);
}

Pt2 closest_on_segment(const Pt2& p, const Pt2& a, const Pt2& b) {
    const double vx = b[0] - a[0];
    const double vy = b[1] - a[1];
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0)
        t = std::clamp(((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2, 0.0, 1.0);
    return {a[0] + t * vx, a[1] + t * vy};
}

bool point_in_convex(const Poly& hull, const Pt2& p, double eps) {
    if (hull.empty()) return false;
    if (hull.size() == 1)
        return std::hypot(p[0] - hull[0][0], p[1] - hull[0][1]) <= eps;
    if (hull.size() == 2) return point_segment_distance(p, hull[0], hull[1]) <= eps;
    for (std::size_t i = 0; i < hull.size(); ++i)
        if (cross2(hull[i], hull[(i + 1) % hull.size()], p) < -eps) return false;
    return true;
}

Pt2 closest_on_hull_boundary(const Poly& hull, const Pt2& p) {
    if (hull.size() == 1) return hull[0];
    Pt2 best = hull[0];
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Pt2 c = closest_on_segment(p, hull[i], hull[(i + 1) % hull.size()]);
        const double d = std::hypot(p[0] - c[0], p[1] - c[1]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

bool point_in_poly(const Poly& poly, const Pt2& p) { return point_in_convex(poly, p, 1e-12); }

/// Separating-axis overlap test for convex CCW polygons.
bool polys_overlap(const Poly& a, const Poly& b) {
    const auto separated_by = [](const Poly& edges, const Poly& pa, const Poly& pb) {
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const Pt2& p1 = edges[i];
            const Pt2& p2 = edges[(i + 1) % edges.size()];
            const double nx = -(p2[1] - p1[1]);
            const double ny = p2[0] - p1[0];
            double amin = std::numeric_limits<double>::infinity(), amax = -amin;
            for (const Pt2& p : pa) {
                const double d = nx * p[0] + ny * p[1];
                amin = std::min(amin, d);
                amax = std::max(amax, d);
            }
            double bmin = std::numeric_limits<double>::infinity(), bmax = -bmin;
            for (const Pt2& p : pb) {
                const double d = nx * p[0] + ny * p[1];
                bmin = std::min(bmin, d);
                bmax = std::max(bmax, d);
            }
            if (amax < bmin || bmax < amin) return true;
        }
        return false;
    };
    if (a.size() < 3 || b.size() < 3) return false;
    return !separated_by(a, a, b) && !separated_by(b, a, b);
}

double poly_distance(const Poly& a, const Poly& b) {
    if (polys_overlap(a, b)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            best = std::min(best, point_segment_distance(a[i], b[j], b[(j + 1) % b.size()]));
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            best = std::min(best, point_segment_distance(b[i], a[j], a[(j + 1) % a.size()]));
    return best;
}

double point_poly_distance(const Pt2& p, const Poly& poly) {
    if (point_in_poly(poly, p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i)
        best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
    return best;
}

double interval_gap(double lo1, double hi1, double lo2, double hi2) {
    if (hi1 < lo2) return lo2 - hi1;
    if (hi2 < lo1) return lo1 - hi2;
    return 0.0;
}

Poly table_polygon(const GroundTruthScene& scene) {
    return {{scene.table_min_x, scene.table_min_y},
            {scene.table_max_x, scene.table_min_y},
            {scene.table_max_x, scene.table_max_y},
            {scene.table_min_x, scene.table_max_y}};
}

}  // namespace

Primitive Primitive::box(int id, double dx, double dy, double dz, Point3 pos, double yaw) {
    Primitive p;
    p.id = id;
    p.shape = Shape::Box;
    p.dx = dx;
    p.dy = dy;
    p.dz = dz;
    p.position = pos;
    p.yaw = normalize_angle(yaw);
    p.validate();
    return p;
}

Primitive Primitive::cylinder(int id, double radius, double height, Point3 pos, double yaw) {
    Primitive p;
    p.id = id;
    p.shape = Shape::Cylinder;
    p.radius = radius;
    p.height = height;
    p.position = pos;
    p.yaw = normalize_angle(yaw);
    p.validate();
    return p;
}

void Primitive::validate() const {
    if (shape == Shape::Box) {
        if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0))
            throw std::invalid_argument("box dimensions must be positive");
    } else {
        if (!(radius > 0.0) || !(height > 0.0))
            throw std::invalid_argument("cylinder dimensions must be positive");
    }
    if (!position.finite() || !std::isfinite(yaw))
        throw std::invalid_argument("primitive pose must be finite");
}

double Primitive::half_height() const {
    return shape == Shape::Box ? dz * 0.5 : height * 0.5;
}

Aabb Primitive::aabb() const {
    if (shape == Shape::Cylinder) {
        return {{position.x - radius, position.y - radius, bottom()},
                {position.x + radius, position.y + radius, top()}};
    }
    const double c = std::abs(std::cos(yaw));
    const double s = std::abs(std::sin(yaw));
    const double hx = 0.5 * (c * dx + s * dy);
    const double hy = 0.5 * (s * dx + c * dy);
    return {{position.x - hx, position.y - hy, bottom()},
            {position.x + hx, position.y + hy, top()}};
}

std::vector<Pt2> Primitive::footprint(int segments) const {
    std::vector<Pt2> poly;
    if (shape == Shape::Box) {
        const double c = std::cos(yaw);
        const double s = std::sin(yaw);
        const double hx = dx * 0.5;
        const double hy = dy * 0.5;
        for (const auto& [lx, ly] :
             {std::pair{-hx, -hy}, std::pair{hx, -hy}, std::pair{hx, hy}, std::pair{-hx, hy}})
            poly.push_back({position.x + c * lx - s * ly, position.y + s * lx + c * ly});
        return poly;
    }
    poly.reserve(segments);
    for (int k = 0; k < segments; ++k) {
        const double a = 2.0 * M_PI * k / segments;
        poly.push_back({position.x + radius * std::cos(a), position.y + radius * std::sin(a)});
    }
    return poly;
}

bool Primitive::contains(const Point3& p) const {
    if (p.z < bottom() - 1e-12 || p.z > top() + 1e-12) return false;
    const double lx = p.x - position.x;
    const double ly = p.y - position.y;
    if (shape == Shape::Cylinder) return lx * lx + ly * ly <= radius * radius + 1e-12;
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double ux = c * lx + s * ly;   // rotate by -yaw
    const double uy = -s * lx + c * ly;
    return std::abs(ux) <= dx * 0.5 + 1e-12 && std::abs(uy) <= dy * 0.5 + 1e-12;
}

double Primitive::ray_hit(const Point3& origin, const Point3& dir) const {
    constexpr double kEps = 1e-12;
    if (shape == Shape::Box) {
        const double c = std::cos(yaw);
        const double s = std::sin(yaw);
        const Point3 lo{origin.x - position.x, origin.y - position.y, origin.z - position.z};
        const std::array<double, 3> o{c * lo.x + s * lo.y, -s * lo.x + c * lo.y, lo.z};
        const std::array<double, 3> d{c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z};
        const std::array<double, 3> h{dx * 0.5, dy * 0.5, dz * 0.5};
        double tmin = -std::numeric_limits<double>::infinity();
        double tmax = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a) {
            if (std::abs(d[a]) < kEps) {
                if (std::abs(o[a]) > h[a]) return -1.0;
                continue;
            }
            double t1 = (-h[a] - o[a]) / d[a];
            double t2 = (h[a] - o[a]) / d[a];
            if (t1 > t2) std::swap(t1, t2);
            tmin = std::max(tmin, t1);
            tmax = std::min(tmax, t2);
            if (tmin > tmax) return -1.0;
        }
        if (tmin > kEps) return tmin;
        if (tmax > kEps) return tmax;
        return -1.0;
    }
    // Cylinder: yaw-invariant. Side surface first, then the caps.
    const double ox = origin.x - position.x;
    const double oy = origin.y - position.y;
    const double oz = origin.z - position.z;
    const double hh = height * 0.5;
    double best = std::numeric_limits<double>::infinity();
    const double a = dir.x * dir.x + dir.y * dir.y;
    if (a > kEps) {
        const double b = 2.0 * (ox * dir.x + oy * dir.y);
        const double cq = ox * ox + oy * oy - radius * radius;
        const double disc = b * b - 4.0 * a * cq;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
                if (t > kEps && t < best && std::abs(oz + t * dir.z) <= hh) best = t;
            }
        }
    }
    if (std::abs(dir.z) > kEps) {
        for (double zc : {-hh, hh}) {
            const double t = (zc - oz) / dir.z;
            if (t <= kEps || t >= best) continue;
            const double px = ox + t * dir.x;
            const double py = oy + t * dir.y;
            if (px * px + py * py <= radius * radius) best = t;
        }
    }
    return std::isinf(best) ? -1.0 : best;
}

bool GroundTruthScene::has(int id) const {
    for (const Primitive& p : primitives)
        if (p.id == id) return true;
    return false;
}

const Primitive& GroundTruthScene::primitive(int id) const {
    for (const Primitive& p : primitives)
        if (p.id == id) return p;
    throw std::out_of_range("unknown object id " + std::to_string(id));
}

Primitive& GroundTruthScene::primitive(int id) {
    for (Primitive& p : primitives)
        if (p.id == id) return p;
    throw std::out_of_range("unknown object id " + std::to_string(id));
}

namespace {

struct SupportCandidate {
    double top;
    Poly patch;  // footprint intersection with the settling object
};

/// Supports under the object's footprint: the table plus every other solid
/// whose footprint overlaps it. A solid entirely at or above the object's top
/// rests on it (or hangs over it) and cannot support it — without this filter
/// re-settling the base of a stack would hoist it onto its own rider.
std::vector<SupportCandidate> support_candidates(const GroundTruthScene& scene,
                                                 const Primitive& obj) {
    constexpr double kAreaEps = 1e-9;
    const Poly foot = obj.footprint();
    std::vector<SupportCandidate> out;
    const Poly table_patch = clip_convex(foot, table_polygon(scene));
    if (poly_area(table_patch) > kAreaEps) out.push_back({scene.table_z, table_patch});
    const auto consider = [&](const Primitive& other) {
        if (other.bottom() >= obj.top() - 1e-9) return;
        const Poly patch = clip_convex(foot, other.footprint());
        if (poly_area(patch) > kAreaEps) out.push_back({other.top(), patch});
    };
    for (const Primitive& p : scene.primitives)
        if (p.id != obj.id) consider(p);
    for (const Primitive& p : scene.obstacles) consider(p);
    return out;
}

}  // namespace

StabilityReport settle(const GroundTruthScene& scene, int object_id) {
    const Primitive& obj = scene.primitive(object_id);
    const Point3 original = obj.position;
    const auto candidates = support_candidates(scene, obj);

    StabilityReport report;
    report.settled_yaw = obj.yaw;

    if (candidates.empty()) {
        // Nothing under any part of the footprint: straight down to the floor.
        report.settled_position = {original.x, original.y,
                                   scene.table_z - kFloorDrop + obj.half_height()};
        report.supported = false;
        report.displacement = distance(original, report.settled_position);
        return report;
    }

    double z_support = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) z_support = std::max(z_support, c.top);

    std::vector<Pt2> contact_points;
    for (const auto& c : candidates)
        if (c.top >= z_support - 1e-9)
            contact_points.insert(contact_points.end(), c.patch.begin(), c.patch.end());
    const Poly hull = convex_hull(contact_points);
    const Pt2 com{original.x, original.y};

    if (point_in_convex(hull, com, 1e-9)) {
        report.settled_position = {original.x, original.y, z_support + obj.half_height()};
        report.supported = true;
        report.displacement = distance(original, report.settled_position);
        return report;
    }

    // Single-step topple: the center slides to the nearest hull edge and the
    // object drops to the next support strictly below the one it tipped off.
    const Pt2 edge = closest_on_hull_boundary(hull, com);
    double next_z = scene.table_z - kFloorDrop;
    const auto land = [&](double top, const Poly& foot_poly) {
        if (top < z_support - 1e-9 && top > next_z && point_in_poly(foot_poly, edge))
            next_z = top;
    };
    land(scene.table_z, table_polygon(scene));
    for (const Primitive& p : scene.primitives)
        if (p.id != object_id) land(p.top(), p.footprint());
    for (const Primitive& p : scene.obstacles) land(p.top(), p.footprint());

    report.settled_position = {edge[0], edge[1], next_z + obj.half_height()};
    report.supported = false;
    report.displacement = distance(original, report.settled_position);
    return report;
}

StabilityReport evaluate_placement(const GroundTruthScene& scene, int query_id,
                                   const PoseOffset& delta) {
    GroundTruthScene moved = scene;
    Primitive& p = moved.primitive(query_id);
    p.position += delta.translation();
    p.yaw = normalize_angle(p.yaw + delta.yaw);
    return settle(moved, query_id);
}

GroundTruthScene generate_scene(Rng& rng, const ForgeConfig& cfg) {
    if (cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects)
        throw std::invalid_argument("bad object count range");
    GroundTruthScene scene;
    scene.table_z = cfg.table_z;
    scene.table_min_x = -cfg.table_half_x;
    scene.table_max_x = cfg.table_half_x;
    scene.table_min_y = -cfg.table_half_y;
    scene.table_max_y = cfg.table_half_y;
    const double elev = M_PI / 4;
    const Point3 eye{0.0, -cfg.camera_distance * std::cos(elev),
                     cfg.table_z + cfg.camera_distance * std::sin(elev)};
    scene.camera = make_look_at_camera(cfg.camera_fx, cfg.camera_fx, cfg.image_width,
                                       cfg.image_height, eye, {0.0, 0.0, cfg.table_z});

    for (int i = 0; i < cfg.obstacle_count; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_place_attempts && !placed; ++attempt) {
            const double ex = rng.uniform(0.15, 0.30);
            const double ey = rng.uniform(0.15, 0.30);
            const double ez = rng.uniform(0.10, 0.30);
            const double x = rng.uniform(scene.table_min_x + ex / 2, scene.table_max_x - ex / 2);
            const double y = rng.uniform(scene.table_min_y + ey / 2, scene.table_max_y - ey / 2);
            Primitive ob = Primitive::box(-(i + 1), ex, ey, ez,
                                          {x, y, cfg.table_z + ez / 2}, 0.0);
            bool clash = false;
            for (const Primitive& other : scene.obstacles)
                if (polys_overlap(ob.footprint(), other.footprint())) clash = true;
            if (!clash) {
                scene.obstacles.push_back(ob);
                placed = true;
            }
        }
        // An unplaced obstacle is dropped silently; fixtures are best-effort.
    }

    const int count = rng.uniform_int(cfg.min_objects, cfg.max_objects);
    for (int id = 1; id <= count; ++id) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_place_attempts && !placed; ++attempt) {
            Primitive p;
            const bool cyl = rng.uniform() < cfg.cylinder_prob;
            const double yaw = rng.uniform(-M_PI, M_PI);
            if (cyl) {
                const double r = rng.uniform(cfg.min_edge, cfg.max_edge) / 2;
                const double h = rng.uniform(cfg.min_height, cfg.max_height);
                p = Primitive::cylinder(id, r, h, {0, 0, 0}, yaw);
            } else {
                const double ex = rng.uniform(cfg.min_edge, cfg.max_edge);
                const double ey = rng.uniform(cfg.min_edge, cfg.max_edge);
                const double ez = rng.uniform(cfg.min_height, cfg.max_height);
                p = Primitive::box(id, ex, ey, ez, {0, 0, 0}, yaw);
            }
            const Aabb box = p.aabb();
            const double hx = (box.max.x - box.min.x) / 2;
            const double hy = (box.max.y - box.min.y) / 2;
            double x, y;
            if (!scene.primitives.empty() && rng.uniform() < cfg.stack_bias) {
                const auto& base = scene.primitives[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<int>(scene.primitives.size()) - 1))];
                x = base.position.x + rng.normal(0.0, 0.02);
                y = base.position.y + rng.normal(0.0, 0.02);
            } else {
                const double lo_x = scene.table_min_x + hx;
                const double hi_x = scene.table_max_x - hx;
                const double lo_y = scene.table_min_y + hy;
                const double hi_y = scene.table_max_y - hy;
                if (lo_x >= hi_x || lo_y >= hi_y) continue;  // object too large
                x = rng.uniform(lo_x, hi_x);
                y = rng.uniform(lo_y, hi_y);
            }
            p.position = {x, y, scene.table_z + 1.0 + p.half_height()};
            scene.primitives.push_back(p);
            const StabilityReport report = settle(scene, id);
            if (report.supported) {
                scene.primitives.back().position = report.settled_position;
                placed = true;
            } else {
                scene.primitives.pop_back();
            }
        }
        if (!placed) throw std::runtime_error("could not generate stable scene");
    }
    return scene;
}

SegmentedScene render_cloud(const GroundTruthScene& scene) {
    scene.camera.validate();
    SegmentedScene out;
    out.background_id = 0;
    out.camera = scene.camera;
    const Point3 origin = scene.camera.position();
    const Poly table = table_polygon(scene);
    for (int v = 0; v < scene.camera.height; ++v) {
        for (int u = 0; u < scene.camera.width; ++u) {
            const Point3 dir = scene.camera.ray_direction(u + 0.5, v + 0.5);
            double best_t = std::numeric_limits<double>::infinity();
            int best_id = 0;
            bool hit = false;
            for (const Primitive& p : scene.primitives) {
                const double t = p.ray_hit(origin, dir);
                if (t > 0.0 && t < best_t) {
                    best_t = t;
                    best_id = p.id;
                    hit = true;
                }
            }
            for (const Primitive& p : scene.obstacles) {
                const double t = p.ray_hit(origin, dir);
                if (t > 0.0 && t < best_t) {
                    best_t = t;
                    best_id = out.background_id;
                    hit = true;
                }
            }
            if (std::abs(dir.z) > 1e-12) {
                const double t = (scene.table_z - origin.z) / dir.z;
                if (t > 0.0 && t < best_t &&
                    point_in_poly(table, {origin.x + t * dir.x, origin.y + t * dir.y})) {
                    best_t = t;
                    best_id = out.background_id;
                    hit = true;
                }
            }
            if (hit) out.clouds[best_id].push_back(origin + dir * best_t);
        }
    }
    return out;
}

SegmentedScene render_object_unoccluded(const GroundTruthScene& scene, int object_id) {
    GroundTruthScene solo = scene;
    solo.primitives.clear();
    solo.primitives.push_back(scene.primitive(object_id));
    return render_cloud(solo);
}

namespace {

std::size_t grid_steps(double length, double spacing) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(length / spacing)));
}

void sample_box(const Primitive& p, double spacing, PointCloud& out) {
    const double hx = p.dx * 0.5, hy = p.dy * 0.5, hz = p.dz * 0.5;
    const double c = std::cos(p.yaw), s = std::sin(p.yaw);
    const auto emit = [&](double lx, double ly, double lz) {
        out.push_back({p.position.x + c * lx - s * ly, p.position.y + s * lx + c * ly,
                       p.position.z + lz});
    };
    const std::size_t nx = grid_steps(p.dx, spacing);
    const std::size_t ny = grid_steps(p.dy, spacing);
    const std::size_t nz = grid_steps(p.dz, spacing);
    for (std::size_t i = 0; i <= nx; ++i) {
        const double lx = -hx + p.dx * i / nx;
        for (std::size_t j = 0; j <= ny; ++j) {
            const double ly = -hy + p.dy * j / ny;
            emit(lx, ly, -hz);
            emit(lx, ly, hz);
        }
        for (std::size_t k = 1; k + 1 <= nz; ++k) {
            const double lz = -hz + p.dz * k / nz;
            emit(lx, -hy, lz);
            emit(lx, hy, lz);
        }
    }
    for (std::size_t j = 1; j + 1 <= ny; ++j) {
        const double ly = -hy + p.dy * j / ny;
        for (std::size_t k = 1; k + 1 <= nz; ++k) {
            const double lz = -hz + p.dz * k / nz;
            emit(-hx, ly, lz);
            emit(hx, ly, lz);
        }
    }
}

void sample_cylinder(const Primitive& p, double spacing, PointCloud& out) {
    const double hh = p.height * 0.5;
    const std::size_t ntheta =
        std::max<std::size_t>(8, grid_steps(2.0 * M_PI * p.radius, spacing));
    const std::size_t nz = grid_steps(p.height, spacing);
    for (std::size_t k = 0; k < ntheta; ++k) {
        const double a = 2.0 * M_PI * k / ntheta;
        const double x = p.position.x + p.radius * std::cos(a);
        const double y = p.position.y + p.radius * std::sin(a);
        for (std::size_t i = 0; i <= nz; ++i)
            out.push_back({x, y, p.position.z - hh + p.height * i / nz});
    }
    for (double zc : {-hh, hh}) {
        out.push_back({p.position.x, p.position.y, p.position.z + zc});
        for (double r = p.radius; r > spacing * 0.5; r -= spacing) {
            const std::size_t n = std::max<std::size_t>(6, grid_steps(2.0 * M_PI * r, spacing));
            for (std::size_t k = 0; k < n; ++k) {
                const double a = 2.0 * M_PI * k / n;
                out.push_back({p.position.x + r * std::cos(a), p.position.y + r * std::sin(a),
                               p.position.z + zc});
            }
        }
    }
}

}  // namespace

SegmentedScene sample_surfaces(const GroundTruthScene& scene, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
    SegmentedScene out;
    out.background_id = 0;
    out.camera = scene.camera;

    PointCloud& bg = out.clouds[out.background_id];
    const double lx = scene.table_max_x - scene.table_min_x;
    const double ly = scene.table_max_y - scene.table_min_y;
    const std::size_t nx = grid_steps(lx, spacing);
    const std::size_t ny = grid_steps(ly, spacing);
    for (std::size_t i = 0; i <= nx; ++i)
        for (std::size_t j = 0; j <= ny; ++j)
            bg.push_back({scene.table_min_x + lx * i / nx, scene.table_min_y + ly * j / ny,
                          scene.table_z});
    for (const Primitive& p : scene.obstacles) sample_box(p, spacing, bg);

    for (const Primitive& p : scene.primitives) {
        PointCloud& cloud = out.clouds[p.id];
        if (p.shape == Primitive::Shape::Box) sample_box(p, spacing, cloud);
        else sample_cylinder(p, spacing, cloud);
    }
    return out;
}

double primitive_distance(const Primitive& a, const Primitive& b) {
    const double dz = interval_gap(a.bottom(), a.top(), b.bottom(), b.top());
    double dxy = 0.0;
    const bool a_cyl = a.shape == Primitive::Shape::Cylinder;
    const bool b_cyl = b.shape == Primitive::Shape::Cylinder;
    if (a_cyl && b_cyl) {
        dxy = std::max(0.0, std::hypot(a.position.x - b.position.x,
                                       a.position.y - b.position.y) -
                                a.radius - b.radius);
    } else if (a_cyl || b_cyl) {
        const Primitive& cyl = a_cyl ? a : b;
        const Primitive& box = a_cyl ? b : a;
        const double d =
            point_poly_distance({cyl.position.x, cyl.position.y}, box.footprint());
        dxy = std::max(0.0, d - cyl.radius);
    } else {
        dxy = poly_distance(a.footprint(), b.footprint());
    }
    return std::hypot(dxy, dz);
}

PredicateVector label_predicates(const GroundTruthScene& scene, int query_id, int anchor_id,
                                 const LabelConfig& cfg) {
    const Primitive& q = scene.primitive(query_id);
    const Primitive& a = scene.primitive(anchor_id);
    const BoxSummary qs{q.position, q.aabb()};
    const BoxSummary as{a.position, a.aabb()};

    PredicateVector v;
    v[Predicate::LeftOf] = directional_rule(qs, as, 0, false, cfg.directional) ? 1.0 : 0.0;
    v[Predicate::RightOf] = directional_rule(as, qs, 0, false, cfg.directional) ? 1.0 : 0.0;
    v[Predicate::InFrontOf] = directional_rule(qs, as, 1, false, cfg.directional) ? 1.0 : 0.0;
    v[Predicate::Behind] = directional_rule(as, qs, 1, false, cfg.directional) ? 1.0 : 0.0;
    v[Predicate::Above] = directional_rule(qs, as, 2, true, cfg.directional) ? 1.0 : 0.0;
    v[Predicate::Below] = directional_rule(as, qs, 2, true, cfg.directional) ? 1.0 : 0.0;
    const double d = primitive_distance(q, a);
    v[Predicate::Near] = d <= cfg.near_threshold ? 1.0 : 0.0;
    v[Predicate::Touching] = d <= cfg.touching_threshold ? 1.0 : 0.0;
    v[Predicate::Centered] =
        std::hypot(q.position.x - a.position.x, q.position.y - a.position.y) <=
                cfg.centered_threshold
            ? 1.0
            : 0.0;
    return v;
}

bool label_aligned(const GroundTruthScene& scene, int query_id, int anchor_id,
                   const LabelConfig& cfg) {
    const Primitive& q = scene.primitive(query_id);
    const Primitive& a = scene.primitive(anchor_id);
    if (q.shape == Primitive::Shape::Cylinder || a.shape == Primitive::Shape::Cylinder)
        return true;  // rotationally symmetric: always aligned
    return std::abs(normalize_angle(q.yaw - a.yaw)) < cfg.aligned_threshold;
}

GroundTruthScene read_ground_truth(std::istream& in) {
    GroundTruthScene scene;
    int next_obstacle = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        const auto fail = [&]() -> std::runtime_error {
            return std::runtime_error(
                fmt::format("malformed scene line {}: \"{}\"", line_no, line));
        };
        if (first == "camera") {
            double fx, fy, cx, cy;
            int w, h;
            std::array<double, 4> q;
            Point3 t;
            if (!(ls >> fx >> fy >> cx >> cy >> w >> h >> q[0] >> q[1] >> q[2] >> q[3] >>
                  t.x >> t.y >> t.z))
                throw fail();
            scene.camera = camera_from_quaternion(fx, fy, cx, cy, w, h, q, t);
        } else if (first == "table") {
            if (!(ls >> scene.table_min_x >> scene.table_min_y >> scene.table_max_x >>
                  scene.table_max_y >> scene.table_z))
                throw fail();
        } else if (first == "obstacle") {
            double ex, ey, ez, yaw;
            Point3 pos;
            if (!(ls >> ex >> ey >> ez >> pos.x >> pos.y >> pos.z >> yaw)) throw fail();
            scene.obstacles.push_back(Primitive::box(next_obstacle--, ex, ey, ez, pos, yaw));
        } else {
            int id;
            std::string shape;
            std::istringstream ps(line);
            if (!(ps >> id >> shape)) throw fail();
            double yaw;
            Point3 pos;
            if (shape == "box") {
                double ex, ey, ez;
                if (!(ps >> ex >> ey >> ez >> pos.x >> pos.y >> pos.z >> yaw)) throw fail();
                scene.primitives.push_back(Primitive::box(id, ex, ey, ez, pos, yaw));
            } else if (shape == "cylinder") {
                double r, h;
                if (!(ps >> r >> h >> pos.x >> pos.y >> pos.z >> yaw)) throw fail();
                scene.primitives.push_back(Primitive::cylinder(id, r, h, pos, yaw));
            } else {
                throw fail();
            }
        }
    }
    return scene;
}

GroundTruthScene load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene file: " + path);
    return read_ground_truth(in);
}

void write_ground_truth(const GroundTruthScene& scene, std::ostream& out) {
    if (scene.camera.fx > 0.0) {
        const auto q = camera_quaternion(scene.camera);
        const Point3& t = scene.camera.translation;
        out << fmt::format("camera {:.9g} {:.9g} {:.9g} {:.9g} {} {} {:.12g} {:.12g} {:.12g} "
                           "{:.12g} {:.9g} {:.9g} {:.9g}\n",
                           scene.camera.fx, scene.camera.fy, scene.camera.cx, scene.camera.cy,
                           scene.camera.width, scene.camera.height, q[0], q[1], q[2], q[3], t.x,
                           t.y, t.z);
    }
    out << fmt::format("table {:.9g} {:.9g} {:.9g} {:.9g} {:.9g}\n", scene.table_min_x,
                       scene.table_min_y, scene.table_max_x, scene.table_max_y, scene.table_z);
    for (const Primitive& p : scene.obstacles)
        out << fmt::format("obstacle {:.9g} {:.9g} {:.9g} {:.17g} {:.17g} {:.17g} {:.17g}\n",
                           p.dx, p.dy, p.dz, p.position.x, p.position.y, p.position.z, p.yaw);
    for (const Primitive& p : scene.primitives) {
        if (p.shape == Primitive::Shape::Box)
            out << fmt::format("{} box {:.9g} {:.9g} {:.9g} {:.17g} {:.17g} {:.17g} {:.17g}\n",
                               p.id, p.dx, p.dy, p.dz, p.position.x, p.position.y, p.position.z,
                               p.yaw);
        else
            out << fmt::format(
                "{} cylinder {:.9g} {:.9g} {:.17g} {:.17g} {:.17g} {:.17g}\n", p.id, p.radius,
                p.height, p.position.x, p.position.y, p.position.z, p.yaw);
    }
}

void save_ground_truth(const GroundTruthScene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scene file: " + path);
    write_ground_truth(scene, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace semplace
