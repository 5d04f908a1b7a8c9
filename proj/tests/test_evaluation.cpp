#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tdcr/errors.hpp"
#include "tdcr/evaluation.hpp"

using namespace tdcr;
namespace fs = std::filesystem;

namespace {

// Published comparison values used purely as a formatter fixture.
ReportTable fixture_table() {
  ReportTable table;
  table.speeds = {1.0, 1.7, 2.5};
  table.rows = {
      {"Ours (w/ Augmentation)",
       {{12.49, 4.9}, {14.04, 6.4}, {18.96, 6.9}},
       {14.25, 5.8}},
      {"Dataset Ref (w/o Aug.)",
       {{25.32, 7.2}, {30.39, 8.2}, {36.10, 10.0}},
       {29.00, 8.1}},
      {"Jacobian-based",
       {{24.46, 23.1}, {32.97, 21.9}, {43.61, 20.9}},
       {30.84, 22.3}},
  };
  return table;
}

}  // namespace

TEST_CASE("report fixture renders the published rows exactly") {
  const std::string text = render_table(fixture_table());
  CHECK(text.find("14.25 / 5.8") != std::string::npos);
  CHECK(text.find("30.84 / 22.3") != std::string::npos);
  CHECK(text.find("12.49 / 4.9") != std::string::npos);
  CHECK(text.find("29.00 / 8.1") != std::string::npos);
  // layout: the Ours row carries its average in the last column
  const size_t ours = text.find("Ours (w/ Augmentation)");
  const size_t ours_end = text.find('\n', ours);
  const std::string ours_line = text.substr(ours, ours_end - ours);
  CHECK(ours_line.rfind("14.25 / 5.8") != std::string::npos);
  CHECK(ours_line.find("12.49 / 4.9") < ours_line.find("14.04 / 6.4"));
  CHECK(ours_line.find("14.04 / 6.4") < ours_line.find("18.96 / 6.9"));
  CHECK(ours_line.find("18.96 / 6.9") < ours_line.find("14.25 / 5.8"));
}

TEST_CASE("table json round trip") {
  const ReportTable table = fixture_table();
  ReportTable back = table_from_json(table_to_json(table));
  CHECK(render_table(back) == render_table(table));
}

TEST_CASE("mismatched cell count is rejected") {
  ReportTable table = fixture_table();
  table.rows[0].cells.pop_back();
  CHECK_THROWS_AS(render_table(table), Error);
}

TEST_CASE("linear fit basics") {
  // identical backends: slope 1, r = 1
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  LinearFit fit = linear_fit(x, x);
  CHECK(fit.slope == doctest::Approx(1.0));
  CHECK(fit.intercept == doctest::Approx(0.0));
  CHECK(fit.pearson_r == doctest::Approx(1.0));

  // affine map
  std::vector<double> y;
  for (double v : x) y.push_back(0.45 * v + 2.0);
  fit = linear_fit(x, y);
  CHECK(fit.slope == doctest::Approx(0.45));
  CHECK(fit.intercept == doctest::Approx(2.0));
  CHECK(fit.pearson_r == doctest::Approx(1.0));

  // fewer than 3 points rejected
  CHECK_THROWS_AS(linear_fit({1.0, 2.0}, {1.0, 2.0}), Error);
  // zero x variance rejected
  CHECK_THROWS_AS(linear_fit({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("perfect tracker produces a zero-error report") {
  // Oracle controller: a backend stub that pins the pose to the reference is
  // emulated by evaluating pose_error of the reference against itself.
  WorkbenchConfig cfg;
  cfg.eval.glyphs = {"line"};
  cfg.eval.speeds = {1.0};
  ReferenceTrajectory ref =
      generate_reference("line", 1.0, cfg.eval.window, cfg.plant);
  double total = 0.0;
  for (size_t t = 0; t + 1 < ref.poses.size(); ++t) {
    auto [pe, oe] = pose_error(ref.poses[t + 1], ref.poses[t + 1]);
    total += pe + oe;
  }
  CHECK(total == doctest::Approx(0.0));
}

TEST_CASE("duration-weighted aggregates") {
  // Assemble a report by hand and verify the weighting identity.
  EvalReport report;
  report.per_speed = {{1.0, 100, 10.0, 2.0}, {2.5, 50, 20.0, 4.0}};
  double pos = 0.0, ori = 0.0;
  int steps = 0;
  for (const auto& agg : report.per_speed) {
    steps += agg.steps;
    pos += agg.mean_pos_mm * agg.steps;
    ori += agg.mean_ori_deg * agg.steps;
  }
  CHECK(std::abs(pos / steps - (10.0 * 100 + 20.0 * 50) / 150.0) < 1e-9);
  CHECK(std::abs(ori / steps - (2.0 * 100 + 4.0 * 50) / 150.0) < 1e-9);
}
