#include "tdcr/trajectories.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tdcr/errors.hpp"

namespace tdcr {

double speed_for_scale(double scale) {
  if (std::abs(scale - 1.0) < 1e-9) return 23.0;
  if (std::abs(scale - 1.7) < 1e-9) return 38.0;
  if (std::abs(scale - 2.5) < 1e-9) return 58.0;
  return 23.0 * scale;
}

const std::vector<std::string>& known_glyphs() {
  static const std::vector<std::string> names = {"R", "O", "B", "T", "line"};
  return names;
}

std::vector<Eigen::Vector2d> glyph_polyline(const std::string& name) {
  using V = Eigen::Vector2d;
  if (name == "R") {
    // Stem up, bowl, retrace to the bowl root, diagonal leg.
    return {V(0.0, 0.0),  V(0.0, 1.0),  V(0.55, 1.0),  V(0.72, 0.92),
            V(0.72, 0.62), V(0.55, 0.52), V(0.0, 0.52), V(0.45, 0.52),
            V(0.85, 0.0)};
  }
  if (name == "O") {
    // Closed 24-gon; first and last vertices coincide.
    std::vector<V> ring;
    const int n = 24;
    for (int i = 0; i <= n; ++i) {
      const double a = 2.0 * M_PI * i / n;
      ring.emplace_back(0.5 + 0.48 * std::cos(a), 0.5 + 0.48 * std::sin(a));
    }
    return ring;
  }
  if (name == "B") {
    return {V(0.0, 0.0),  V(0.0, 1.0),  V(0.55, 1.0),  V(0.7, 0.87),
            V(0.7, 0.63), V(0.55, 0.5), V(0.0, 0.5),  V(0.55, 0.5),
            V(0.7, 0.37), V(0.7, 0.13), V(0.55, 0.0), V(0.0, 0.0)};
  }
  if (name == "T") {
    return {V(0.0, 1.0), V(1.0, 1.0), V(0.5, 1.0), V(0.5, 0.0)};
  }
  if (name == "line") {
    // Horizontal stroke; its physical length is pinned to 46 mm by the
    // generator regardless of the window width.
    return {V(0.0, 0.5), V(1.0, 0.5)};
  }
  fail(ErrorKind::invalid_argument,
       "unknown glyph '" + name + "'; expected one of R, O, B, T, line");
}

ReferenceTrajectory generate_reference(const std::string& name, double speed_scale,
                                       const GlyphWindow& window,
                                       const PlantConfig& plant) {
  const std::vector<Eigen::Vector2d> unit = glyph_polyline(name);

  // Scale into the window, centered on the base axis.
  std::vector<Eigen::Vector3d> verts;
  verts.reserve(unit.size());
  const double w = name == "line" ? 46.0 : window.width;
  for (const auto& v : unit)
    verts.emplace_back((v.x() - 0.5) * w,
                       (v.y() - 0.5) * (name == "line" ? 0.0 : window.height),
                       window.z_offset);

  const double reach = plant.total_length();
  for (size_t i = 0; i < verts.size(); ++i) {
    if (verts[i].norm() > 0.999 * reach)
      fail(ErrorKind::invalid_argument,
           "glyph '" + name + "' vertex " + std::to_string(i) + " at (" +
               std::to_string(verts[i].x()) + ", " + std::to_string(verts[i].y()) +
               ", " + std::to_string(verts[i].z()) + ") exceeds the workspace");
  }

  ReferenceTrajectory traj;
  traj.name = name;
  traj.speed_scale = speed_scale;
  traj.speed_mm_s = speed_for_scale(speed_scale);
  traj.dwell_steps = static_cast<int>(std::lround(window.dwell_s / plant.dt));

  auto push_pose = [&](const Eigen::Vector3d& p) {
    Pose6 pose;
    pose.p = p;
    pose.phi = window.nominal_orientation;
    traj.poses.push_back(pose);
  };

  // Entry dwell.
  for (int i = 0; i < traj.dwell_steps; ++i) push_pose(verts.front());

  // Arc-length resampling at constant speed * dt.
  const double step = traj.speed_mm_s * plant.dt;
  size_t seg = 0;
  double along = 0.0;  // distance already consumed on segment `seg`
  while (seg + 1 < verts.size()) {
    const double seg_len = (verts[seg + 1] - verts[seg]).norm();
    if (along + step <= seg_len) {
      along += step;
      push_pose(verts[seg] + (verts[seg + 1] - verts[seg]) * (along / seg_len));
    } else {
      double remaining = step - (seg_len - along);
      ++seg;
      while (seg + 1 < verts.size() &&
             remaining > (verts[seg + 1] - verts[seg]).norm()) {
        remaining -= (verts[seg + 1] - verts[seg]).norm();
        ++seg;
      }
      if (seg + 1 >= verts.size()) break;
      along = remaining;
      const double len = (verts[seg + 1] - verts[seg]).norm();
      push_pose(verts[seg] + (verts[seg + 1] - verts[seg]) * (along / len));
    }
  }
  // Land exactly on the final vertex (unless the last sample already did),
  // then exit dwell.
  if ((traj.poses.back().p - verts.back()).norm() > 1e-9) push_pose(verts.back());
  for (int i = 0; i < traj.dwell_steps; ++i) push_pose(verts.back());
  return traj;
}

void write_pose_csv(const std::vector<Pose6>& poses, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open for writing: " + path);
  os << "px,py,pz,rx,ry,rz\n";
  char buf[32];
  for (const auto& pose : poses) {
    const Eigen::Matrix<double, 6, 1> v = pose.flat();
    for (int c = 0; c < 6; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", v[c]);
      os << (c ? "," : "") << buf;
    }
    os << "\n";
  }
}

}  // namespace tdcr
