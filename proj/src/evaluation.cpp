#include "tdcr/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tdcr/errors.hpp"

namespace tdcr {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

std::unique_ptr<Backend> make_backend(const std::string& name,
                                      const SurrogateModel& surrogate,
                                      const PlantConfig& plant, uint64_t seed) {
  if (name == "plant") return std::make_unique<PlantBackend>(plant, seed);
  if (name == "surrogate") {
    const Observation neutral = reset_plant(plant, seed).obs;
    return std::make_unique<SurrogateBackend>(
        std::make_shared<SurrogateModel>(surrogate), neutral);
  }
  fail(ErrorKind::invalid_argument,
       "unknown backend '" + name + "', expected 'plant' or 'surrogate'");
}

}  // namespace

EvalReport evaluate_controller(const ControllerSpec& controller,
                               const std::string& backend_name,
                               const SurrogateModel& surrogate,
                               const WorkbenchConfig& cfg, uint64_t seed) {
  if (!controller.policy.has_value() && !controller.jacobian.has_value())
    fail(ErrorKind::invalid_argument, "controller spec has neither policy nor jacobian");

  EvalReport report;
  report.controller_id = controller.id;
  report.backend = backend_name;

  for (double speed : cfg.eval.speeds) {
    for (const std::string& glyph : cfg.eval.glyphs) {
      ReferenceTrajectory ref =
          generate_reference(glyph, speed, cfg.eval.window, cfg.plant);
      // Optional OOD probe: constant offset on the whole reference.
      if (cfg.eval.reference_bias.squaredNorm() > 0.0) {
        for (auto& pose : ref.poses) {
          pose.p += cfg.eval.reference_bias.head<3>();
          pose.phi = wrap_angles(pose.phi + cfg.eval.reference_bias.tail<3>());
        }
      }

      const uint64_t run_seed =
          derive_seed(seed, glyph + ":" + std::to_string(speed));
      std::unique_ptr<Backend> backend =
          make_backend(backend_name, surrogate, cfg.plant, run_seed);

      TrajectoryResult row;
      row.glyph = glyph;
      row.speed_scale = speed;
      try {
        ClosedLoopResult loop;
        if (controller.policy)
          loop = run_closed_loop(*controller.policy, surrogate, *backend,
                                 ref.poses, -1);
        else
          loop = run_jacobian_loop(*backend, ref.poses, -1, *controller.jacobian,
                                   cfg.plant.dt, cfg.plant.v_max, cfg.plant.l_min,
                                   cfg.plant.l_max);
        row.steps = static_cast<int>(loop.pos_err.size());
        if (loop.aborted) {
          row.failed = true;
          row.error_at_abort_mm = loop.pos_err.empty() ? 0.0 : loop.pos_err.back();
        } else {
          row.mean_pos_mm = loop.mean_pos_err();
          row.mean_ori_deg = loop.mean_ori_err() * kRadToDeg;
        }
      } catch (const Error& e) {
        row.failed = true;
        row.steps = 0;
      }
      report.trajectories.push_back(std::move(row));
    }
  }

  // Duration-weighted aggregates; failed trajectories are excluded.
  for (double speed : cfg.eval.speeds) {
    SpeedAggregate agg;
    agg.speed_scale = speed;
    double pos = 0.0, ori = 0.0;
    for (const auto& row : report.trajectories) {
      if (row.speed_scale != speed || row.failed) continue;
      agg.steps += row.steps;
      pos += row.mean_pos_mm * row.steps;
      ori += row.mean_ori_deg * row.steps;
    }
    if (agg.steps > 0) {
      agg.mean_pos_mm = pos / agg.steps;
      agg.mean_ori_deg = ori / agg.steps;
    }
    report.per_speed.push_back(agg);
  }
  double pos = 0.0, ori = 0.0;
  for (const auto& agg : report.per_speed) {
    report.overall.steps += agg.steps;
    pos += agg.mean_pos_mm * agg.steps;
    ori += agg.mean_ori_deg * agg.steps;
  }
  if (report.overall.steps > 0) {
    report.overall.mean_pos_mm = pos / report.overall.steps;
    report.overall.mean_ori_deg = ori / report.overall.steps;
  }
  return report;
}

namespace {

std::string format_cell(const ReportCell& cell) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f / %.1f", cell.pos_mm, cell.ori_deg);
  return std::string(buf);
}

std::string pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_table(const ReportTable& table) {
  constexpr size_t method_width = 30;
  constexpr size_t cell_width = 15;

  std::ostringstream os;
  os << table.title << "\n";
  os << pad("Method", method_width);
  for (double s : table.speeds) {
    char head[32];
    std::snprintf(head, sizeof(head), "Speed %.1fx", s);
    os << "| " << pad(head, cell_width);
  }
  os << "| " << pad("Average", cell_width) << "\n";
  os << std::string(method_width, '-');
  for (size_t i = 0; i <= table.speeds.size(); ++i)
    os << "+" << std::string(cell_width + 1, '-');
  os << "\n";
  for (const auto& row : table.rows) {
    if (row.cells.size() != table.speeds.size())
      fail(ErrorKind::invalid_argument,
           "report row '" + row.method + "' has " + std::to_string(row.cells.size()) +
               " cells for " + std::to_string(table.speeds.size()) + " speeds");
    os << pad(row.method, method_width);
    for (const auto& cell : row.cells) os << "| " << pad(format_cell(cell), cell_width);
    os << "| " << pad(format_cell(row.average), cell_width) << "\n";
  }
  return os.str();
}

nlohmann::json table_to_json(const ReportTable& table) {
  nlohmann::json j;
  j["title"] = table.title;
  j["speeds"] = table.speeds;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : row.cells)
      cells.push_back({{"pos_mm", c.pos_mm}, {"ori_deg", c.ori_deg}});
    j["rows"].push_back({{"method", row.method},
                         {"cells", cells},
                         {"average",
                          {{"pos_mm", row.average.pos_mm},
                           {"ori_deg", row.average.ori_deg}}}});
  }
  return j;
}

ReportTable table_from_json(const nlohmann::json& j) {
  ReportTable table;
  if (j.contains("title")) table.title = j.at("title").get<std::string>();
  table.speeds = j.at("speeds").get<std::vector<double>>();
  for (const auto& row_json : j.at("rows")) {
    ReportRow row;
    row.method = row_json.at("method").get<std::string>();
    for (const auto& c : row_json.at("cells"))
      row.cells.push_back({c.at("pos_mm").get<double>(), c.at("ori_deg").get<double>()});
    row.average = {row_json.at("average").at("pos_mm").get<double>(),
                   row_json.at("average").at("ori_deg").get<double>()};
    table.rows.push_back(std::move(row));
  }
  return table;
}

ReportTable report_to_table(const std::vector<EvalReport>& reports) {
  ReportTable table;
  if (reports.empty()) return table;
  for (const auto& agg : reports.front().per_speed)
    table.speeds.push_back(agg.speed_scale);
  for (const auto& report : reports) {
    ReportRow row;
    row.method = report.controller_id;
    for (const auto& agg : report.per_speed)
      row.cells.push_back({agg.mean_pos_mm, agg.mean_ori_deg});
    row.average = {report.overall.mean_pos_mm, report.overall.mean_ori_deg};
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_eval_report(const EvalReport& report, const std::string& prefix) {
  std::ofstream csv(prefix + ".csv", std::ios::trunc);
  if (!csv) fail(ErrorKind::io, "cannot open for writing: " + prefix + ".csv");
  csv << "glyph,speed_scale,steps,mean_pos_mm,mean_ori_deg,failed,error_at_abort_mm\n";
  char buf[64];
  for (const auto& row : report.trajectories) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", row.mean_pos_mm, row.mean_ori_deg);
    csv << row.glyph << "," << row.speed_scale << "," << row.steps << "," << buf
        << "," << (row.failed ? 1 : 0) << "," << row.error_at_abort_mm << "\n";
  }

  nlohmann::json j;
  j["controller"] = report.controller_id;
  j["backend"] = report.backend;
  j["per_speed"] = nlohmann::json::array();
  for (const auto& agg : report.per_speed)
    j["per_speed"].push_back({{"speed_scale", agg.speed_scale},
                              {"steps", agg.steps},
                              {"mean_pos_mm", agg.mean_pos_mm},
                              {"mean_ori_deg", agg.mean_ori_deg}});
  j["overall"] = {{"steps", report.overall.steps},
                  {"mean_pos_mm", report.overall.mean_pos_mm},
                  {"mean_ori_deg", report.overall.mean_ori_deg}};
  std::ofstream js(prefix + ".json", std::ios::trunc);
  if (!js) fail(ErrorKind::io, "cannot open for writing: " + prefix + ".json");
  js << j.dump(2) << "\n";
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    fail(ErrorKind::invalid_argument,
         "linear_fit needs at least 3 paired points, got " + std::to_string(x.size()));
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0)
    fail(ErrorKind::invalid_argument, "linear_fit: x values are collinear (zero variance)");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.pearson_r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 1.0;
  return fit;
}

CorrelationStudy correlation_study(const std::vector<PolicyModel>& policies,
                                   const std::vector<std::string>& labels,
                                   const SurrogateModel& surrogate,
                                   const WorkbenchConfig& cfg, uint64_t seed) {
  if (policies.size() < 3)
    fail(ErrorKind::invalid_argument,
         "correlation study needs >= 3 checkpoints, got " +
             std::to_string(policies.size()));
  if (labels.size() != policies.size())
    fail(ErrorKind::invalid_argument, "correlation study: label count mismatch");

  CorrelationStudy study;
  std::vector<double> sp, pp, so, po;
  for (size_t i = 0; i < policies.size(); ++i) {
    ControllerSpec spec;
    spec.id = labels[i];
    spec.policy = policies[i];
    EvalReport on_surrogate =
        evaluate_controller(spec, "surrogate", surrogate, cfg, seed);
    EvalReport on_plant = evaluate_controller(spec, "plant", surrogate, cfg, seed);
    CorrelationPoint point;
    point.checkpoint = labels[i];
    point.surrogate_pos_mm = on_surrogate.overall.mean_pos_mm;
    point.surrogate_ori_deg = on_surrogate.overall.mean_ori_deg;
    point.plant_pos_mm = on_plant.overall.mean_pos_mm;
    point.plant_ori_deg = on_plant.overall.mean_ori_deg;
    study.points.push_back(point);
    sp.push_back(point.surrogate_pos_mm);
    pp.push_back(point.plant_pos_mm);
    so.push_back(point.surrogate_ori_deg);
    po.push_back(point.plant_ori_deg);
  }
  study.position = linear_fit(sp, pp);
  study.orientation = linear_fit(so, po);
  return study;
}

}  // namespace tdcr
