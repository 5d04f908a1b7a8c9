#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdcr/backend.hpp"
#include "tdcr/config.hpp"
#include "tdcr/jacobian_controller.hpp"
#include "tdcr/policy.hpp"
#include "tdcr/trajectories.hpp"

namespace tdcr {

struct TrajectoryResult {
  std::string glyph;
  double speed_scale = 1.0;
  int steps = 0;
  double mean_pos_mm = 0.0;
  double mean_ori_deg = 0.0;
  bool failed = false;
  double error_at_abort_mm = 0.0;
};

struct SpeedAggregate {
  double speed_scale = 1.0;
  int steps = 0;  // total duration weight
  double mean_pos_mm = 0.0;
  double mean_ori_deg = 0.0;
};

struct EvalReport {
  std::string controller_id;
  std::string backend;
  std::vector<TrajectoryResult> trajectories;
  std::vector<SpeedAggregate> per_speed;  // duration-weighted
  SpeedAggregate overall;                 // duration-weighted across speeds
};

// Either a trained policy (with its dynamics surrogate as observer) or the
// Jacobian baseline.
struct ControllerSpec {
  std::string id;  // "policy:<path>" or "jacobian"
  std::optional<PolicyModel> policy;
  std::optional<JacobianConfig> jacobian;
};

// Runs the controller over every (glyph, speed) pair on the chosen backend.
// `surrogate` provides the policy's hidden-state observer and the surrogate
// backend dynamics. The eval seed fixes plant measurement noise.
EvalReport evaluate_controller(const ControllerSpec& controller,
                               const std::string& backend_name,
                               const SurrogateModel& surrogate,
                               const WorkbenchConfig& cfg, uint64_t seed);

// ---- report formatting ----

struct ReportCell {
  double pos_mm = 0.0;
  double ori_deg = 0.0;
};

struct ReportRow {
  std::string method;
  std::vector<ReportCell> cells;  // one per speed column
  ReportCell average;
};

struct ReportTable {
  std::string title =
      "Tracking Precision Comparison (Position Error in mm, Orientation Error in deg)";
  std::vector<double> speeds;
  std::vector<ReportRow> rows;
};

// Fixed-layout text table; cells render as "<pos> / <ori>" with position to
// two decimals and orientation to one.
std::string render_table(const ReportTable& table);

nlohmann::json table_to_json(const ReportTable& table);
ReportTable table_from_json(const nlohmann::json& j);

ReportTable report_to_table(const std::vector<EvalReport>& reports);

void write_eval_report(const EvalReport& report, const std::string& prefix);

// ---- correlation study ----

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationPoint {
  std::string checkpoint;
  double surrogate_pos_mm = 0.0, surrogate_ori_deg = 0.0;
  double plant_pos_mm = 0.0, plant_ori_deg = 0.0;
};

struct CorrelationStudy {
  std::vector<CorrelationPoint> points;
  LinearFit position;     // plant error vs surrogate error
  LinearFit orientation;
};

// Evaluates every checkpoint on both backends and fits plant vs surrogate
// errors. Requires at least 3 checkpoints.
CorrelationStudy correlation_study(const std::vector<PolicyModel>& policies,
                                   const std::vector<std::string>& labels,
                                   const SurrogateModel& surrogate,
                                   const WorkbenchConfig& cfg, uint64_t seed);

}  // namespace tdcr
