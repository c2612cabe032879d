#include "semplace/scene_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semplace {

namespace {

[[noreturn]] void bad_line(std::size_t line_no, const std::string& line) {
    throw std::runtime_error(
        fmt::format("malformed cloud line {}: \"{}\"", line_no, line));
}

}  // namespace

SegmentedScene read_scene_cloud(std::istream& in) {
    SegmentedScene scene;
    bool has_camera = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank or comment-only
        if (first == "camera") {
            double fx, fy, cx, cy;
            int w, h;
            std::array<double, 4> q;
            Point3 t;
            if (!(ls >> fx >> fy >> cx >> cy >> w >> h >> q[0] >> q[1] >> q[2] >> q[3] >>
                  t.x >> t.y >> t.z))
                bad_line(line_no, line);
            scene.camera = camera_from_quaternion(fx, fy, cx, cy, w, h, q, t);
            has_camera = true;
            continue;
        }
        if (first == "background") {
            if (!(ls >> scene.background_id)) bad_line(line_no, line);
            continue;
        }
        Point3 p;
        int id;
        std::istringstream ps(line);
        if (!(ps >> p.x >> p.y >> p.z >> id)) bad_line(line_no, line);
        if (!p.finite()) bad_line(line_no, line);
        scene.clouds[id].push_back(p);
    }
    (void)has_camera;
    return scene;
}

SegmentedScene load_scene_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cloud file: " + path);
    return read_scene_cloud(in);
}

void write_scene_cloud(const SegmentedScene& scene, std::ostream& out) {
    if (scene.camera.fx > 0.0) {
        const auto q = camera_quaternion(scene.camera);
        const Point3& t = scene.camera.translation;
        out << fmt::format("camera {:.9g} {:.9g} {:.9g} {:.9g} {} {} {:.12g} {:.12g} {:.12g} "
                           "{:.12g} {:.9g} {:.9g} {:.9g}\n",
                           scene.camera.fx, scene.camera.fy, scene.camera.cx, scene.camera.cy,
                           scene.camera.width, scene.camera.height, q[0], q[1], q[2], q[3], t.x,
                           t.y, t.z);
    }
    out << fmt::format("background {}\n", scene.background_id);
    for (const auto& [id, cloud] : scene.clouds)
        for (const Point3& p : cloud)
            out << fmt::format("{:.9g} {:.9g} {:.9g} {}\n", p.x, p.y, p.z, id);
}

void save_scene_cloud(const SegmentedScene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write cloud file: " + path);
    write_scene_cloud(scene, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace semplace
