#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tdcr/errors.hpp"
#include "tdcr/trajectories.hpp"

using namespace tdcr;

namespace {

PlantConfig desk_plant() { return PlantConfig{}; }

}  // namespace

TEST_CASE("speed mapping matches the three scales") {
  CHECK(speed_for_scale(1.0) == doctest::Approx(23.0));
  CHECK(speed_for_scale(1.7) == doctest::Approx(38.0));
  CHECK(speed_for_scale(2.5) == doctest::Approx(58.0));
}

TEST_CASE("46 mm line at 23 mm/s is 2 s of motion plus dwells") {
  GlyphWindow window;
  PlantConfig plant = desk_plant();
  ReferenceTrajectory traj = generate_reference("line", 1.0, window, plant);
  const int dwell = traj.dwell_steps;
  CHECK(dwell == 50);
  // 46 / (23 * 0.02) = 100 motion samples after the entry dwell
  CHECK(traj.steps() == 2 * dwell + 100);
  // the path starts and ends 46 mm apart
  CHECK((traj.poses.front().p - traj.poses.back().p).norm() == doctest::Approx(46.0));
}

TEST_CASE("speed scale divides the motion sample count") {
  GlyphWindow window;
  PlantConfig plant = desk_plant();
  ReferenceTrajectory slow = generate_reference("R", 1.0, window, plant);
  ReferenceTrajectory fast = generate_reference("R", 2.5, window, plant);
  const int slow_motion = slow.steps() - 2 * slow.dwell_steps;
  const int fast_motion = fast.steps() - 2 * fast.dwell_steps;
  // 58 / 23 = 2.52x fewer samples, up to rounding
  CHECK(slow_motion / static_cast<double>(fast_motion) ==
        doctest::Approx(58.0 / 23.0).epsilon(0.03));
}

TEST_CASE("O glyph closes on itself") {
  GlyphWindow window;
  ReferenceTrajectory traj = generate_reference("O", 1.0, window, desk_plant());
  CHECK((traj.poses.front().p - traj.poses.back().p).norm() < 1e-9);
}

TEST_CASE("reference speed invariant within 5 percent") {
  // Per-step increments match speed * dt away from polyline corners (an
  // increment spanning a corner is shorter in the Euclidean metric); the mean
  // speed over the whole motion segment stays within 5% of nominal.
  GlyphWindow window;
  PlantConfig plant = desk_plant();
  for (const std::string& glyph : known_glyphs()) {
    for (double scale : {1.0, 1.7, 2.5}) {
      ReferenceTrajectory traj = generate_reference(glyph, scale, window, plant);
      const double nominal = traj.speed_mm_s * plant.dt;

      // vertex arc positions of the scaled polyline
      std::vector<Eigen::Vector2d> unit = glyph_polyline(glyph);
      const double w = glyph == "line" ? 46.0 : window.width;
      const double h = glyph == "line" ? 0.0 : window.height;
      std::vector<double> vertex_arc = {0.0};
      for (size_t i = 1; i < unit.size(); ++i) {
        const Eigen::Vector2d d((unit[i].x() - unit[i - 1].x()) * w,
                                (unit[i].y() - unit[i - 1].y()) * h);
        vertex_arc.push_back(vertex_arc.back() + d.norm());
      }

      const int start = traj.dwell_steps;
      const int stop = traj.steps() - traj.dwell_steps - 2;  // skip final landing
      int checked = 0;
      double total = 0.0;
      int count = 0;
      for (int t = start; t < stop; ++t) {
        const double inc = (traj.poses[t + 1].p - traj.poses[t].p).norm();
        total += inc;
        ++count;
        // poses[start + j] sits at arc (j + 1) * nominal along the polyline
        const double s0 = (t - start + 1) * nominal;
        const double s1 = s0 + nominal;
        bool crosses_corner = false;
        for (double v : vertex_arc)
          if (v > s0 + 1e-9 && v < s1 - 1e-9) crosses_corner = true;
        if (crosses_corner) continue;
        CHECK(inc == doctest::Approx(nominal).epsilon(0.05));
        ++checked;
      }
      CHECK(checked > 10);
      CHECK(total / count == doctest::Approx(nominal).epsilon(0.05));
    }
  }
}

TEST_CASE("orientation reference is the nominal orientation throughout") {
  GlyphWindow window;
  window.nominal_orientation << 0.1, -0.05, 0.2;
  ReferenceTrajectory traj = generate_reference("T", 1.0, window, desk_plant());
  for (const auto& pose : traj.poses)
    CHECK((pose.phi - window.nominal_orientation).norm() == 0.0);
}

TEST_CASE("glyph exceeding the workspace names the vertex") {
  GlyphWindow window;
  window.z_offset = 299.0;  // pushes corner vertices past the reach
  try {
    generate_reference("R", 1.0, window, desk_plant());
    FAIL("expected workspace error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("vertex") != std::string::npos);
    CHECK(msg.find("workspace") != std::string::npos);
  }
}

TEST_CASE("unknown glyph is rejected") {
  GlyphWindow window;
  CHECK_THROWS_AS(generate_reference("Q", 1.0, window, desk_plant()), Error);
}

TEST_CASE("sample counts stay stable across runs") {
  GlyphWindow window;
  ReferenceTrajectory a = generate_reference("B", 1.7, window, desk_plant());
  ReferenceTrajectory b = generate_reference("B", 1.7, window, desk_plant());
  REQUIRE(a.steps() == b.steps());
  for (int t = 0; t < a.steps(); ++t)
    CHECK((a.poses[t].flat() - b.poses[t].flat()).norm() == 0.0);
}
