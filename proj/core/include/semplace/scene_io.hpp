#ifndef SEMPLACE_SCENE_IO_HPP
#define SEMPLACE_SCENE_IO_HPP

#include <iosfwd>
#include <string>

#include "semplace/geometry.hpp"

namespace semplace {

/// Segmented-cloud text format. One point per line:
///
///   x y z segment_id
///
/// in meters with an integer segment id. '#' starts a comment. Two optional
/// header lines may appear before the points:
///
///   camera fx fy cx cy width height qw qx qy qz tx ty tz
///   background <id>
///
/// where the quaternion/translation give the world-to-camera transform. A
/// missing background header leaves the default id 0; a missing camera line
/// leaves a default (invalid) camera, which is fine for IO-only uses.
SegmentedScene read_scene_cloud(std::istream& in);
SegmentedScene load_scene_cloud(const std::string& path);

void write_scene_cloud(const SegmentedScene& scene, std::ostream& out);
void save_scene_cloud(const SegmentedScene& scene, const std::string& path);

}  // namespace semplace

#endif  // SEMPLACE_SCENE_IO_HPP
