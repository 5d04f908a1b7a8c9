#pragma once

#include <string>
#include <vector>

#include "tdcr/core_math.hpp"
#include "tdcr/plant.hpp"

namespace tdcr {

// Planar window the letter paths are scaled into, at a constant height in the
// workspace; the orientation reference is held at a fixed nominal value.
struct GlyphWindow {
  double width = 60.0;    // mm, x extent
  double height = 80.0;   // mm, y extent
  double z_offset = 285.0;  // mm
  Eigen::Vector3d nominal_orientation = Eigen::Vector3d::Zero();
  double dwell_s = 1.0;   // entry/exit dwell
};

struct ReferenceTrajectory {
  std::string name;      // R, O, B, T, line
  double speed_scale = 1.0;
  double speed_mm_s = 23.0;
  int dwell_steps = 50;
  std::vector<Pose6> poses;  // 50 Hz

  int steps() const { return static_cast<int>(poses.size()); }
  double duration_s(double dt) const { return steps() * dt; }
};

// 23 / 38 / 58 mm/s at scales 1.0 / 1.7 / 2.5.
double speed_for_scale(double scale);

const std::vector<std::string>& known_glyphs();

// Unit-box polyline for a glyph (documented vertex list).
std::vector<Eigen::Vector2d> glyph_polyline(const std::string& name);

// Scales the glyph into the window, resamples it at constant speed * dt, adds
// entry/exit dwells, validates every vertex against the reachable workspace.
ReferenceTrajectory generate_reference(const std::string& name, double speed_scale,
                                       const GlyphWindow& window,
                                       const PlantConfig& plant);

void write_pose_csv(const std::vector<Pose6>& poses, const std::string& path);

}  // namespace tdcr
