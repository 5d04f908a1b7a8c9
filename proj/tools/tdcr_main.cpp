// Command-line front end for the TDCR tracking workbench. Talks to the core
// exclusively through the C API in tdcr_workbench.h.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdcr_workbench.h"

namespace {

struct WorkbenchCloser {
  void operator()(tdcr_workbench* wb) const { tdcr_workbench_close(wb); }
};
using WorkbenchPtr = std::unique_ptr<tdcr_workbench, WorkbenchCloser>;

int report_failure(const tdcr_workbench* wb, tdcr_status status, const char* what) {
  std::fprintf(stderr, "error: %s failed (%s): %s\n", what, tdcr_status_name(status),
               wb ? tdcr_last_error(wb) : "");
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TDCR tracking workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON config file (defaults built in)");
  app.add_option("--seed", seed, "master seed override (nonzero)");
  app.add_option("--out-dir", out_dir, "directory for outputs");
  app.add_flag("--quiet", quiet, "suppress progress output");

  std::string dataset = "dataset.bin", dynamics = "dynamics.ckpt";
  std::string policy = "policy.ckpt", prefix = "eval";
  std::string controller = "jacobian", backend = "plant", axis = "np";
  std::string table_json, out_txt = "report.txt", csv_path = "trajectory.csv";
  std::vector<std::string> checkpoints;
  std::vector<int> values;
  uint64_t traj_index = 0;
  bool no_augmentation = false;

  auto* collect = app.add_subcommand("collect", "run the excitation policy on the plant");
  collect->add_option("--dataset", dataset, "output container path");

  auto* exportc = app.add_subcommand("export-csv", "dump one trajectory as CSV");
  exportc->add_option("--dataset", dataset);
  exportc->add_option("--index", traj_index, "trajectory index");
  exportc->add_option("--out", csv_path, "CSV path");

  auto* traind = app.add_subcommand("train-dynamics", "fit the dynamics surrogate");
  traind->add_option("--dataset", dataset);
  traind->add_option("--checkpoint", dynamics, "output checkpoint path");

  auto* trainp = app.add_subcommand("train-policy", "optimize the tracking policy");
  trainp->add_option("--dataset", dataset);
  trainp->add_option("--dynamics", dynamics, "dynamics checkpoint");
  trainp->add_option("--checkpoint", policy, "output checkpoint path");
  trainp->add_flag("--no-augmentation", no_augmentation,
                   "train on raw dataset references");

  auto* eval = app.add_subcommand("eval", "closed-loop tracking evaluation");
  eval->add_option("--controller", controller, "'jacobian' or a policy checkpoint");
  eval->add_option("--backend", backend, "'plant' or 'surrogate'");
  eval->add_option("--dynamics", dynamics, "dynamics checkpoint");
  eval->add_option("--prefix", prefix, "report file prefix");

  auto* correlate = app.add_subcommand("correlate",
                                       "surrogate-vs-plant error correlation");
  correlate->add_option("--checkpoints", checkpoints, "policy checkpoints (>= 3)")
      ->required();
  correlate->add_option("--dynamics", dynamics);
  correlate->add_option("--prefix", prefix);

  auto* sweep = app.add_subcommand("sweep", "horizon sensitivity sweep");
  sweep->add_option("--axis", axis, "'np' or 'nr'");
  sweep->add_option("--values", values, "ascending horizon values")->required();
  sweep->add_option("--dataset", dataset);
  sweep->add_option("--dynamics", dynamics);
  sweep->add_option("--prefix", prefix);

  auto* report = app.add_subcommand("report", "render a report table JSON as text");
  report->add_option("--table", table_json, "table JSON path")->required();
  report->add_option("--out", out_txt, "output text path");

  auto* dumpcfg = app.add_subcommand("dump-config", "write the effective config");
  std::string cfg_out = "config.json";
  dumpcfg->add_option("--out", cfg_out, "output path");

  CLI11_PARSE(app, argc, argv);

  tdcr_workbench* raw = nullptr;
  tdcr_status status =
      tdcr_workbench_open(config_path.empty() ? nullptr : config_path.c_str(), seed,
                          out_dir.empty() ? nullptr : out_dir.c_str(), quiet ? 0 : 1,
                          &raw);
  if (status != TDCR_OK) {
    std::fprintf(stderr, "error: cannot open workbench (%s)\n",
                 tdcr_status_name(status));
    return 1;
  }
  WorkbenchPtr wb(raw);

  if (collect->parsed()) {
    status = tdcr_collect(wb.get(), dataset.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "collect");
  } else if (exportc->parsed()) {
    status = tdcr_export_trajectory_csv(wb.get(), dataset.c_str(), traj_index,
                                        csv_path.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "export-csv");
  } else if (traind->parsed()) {
    status = tdcr_train_dynamics(wb.get(), dataset.c_str(), dynamics.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "train-dynamics");
  } else if (trainp->parsed()) {
    status = tdcr_train_policy(wb.get(), dataset.c_str(), dynamics.c_str(),
                               no_augmentation ? 0 : 1, policy.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "train-policy");
  } else if (eval->parsed()) {
    status = tdcr_evaluate(wb.get(), controller.c_str(), backend.c_str(),
                           dynamics.c_str(), prefix.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "eval");
  } else if (correlate->parsed()) {
    std::vector<const char*> ptrs;
    for (const auto& c : checkpoints) ptrs.push_back(c.c_str());
    status = tdcr_correlate(wb.get(), ptrs.data(), ptrs.size(), dynamics.c_str(),
                            prefix.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "correlate");
  } else if (sweep->parsed()) {
    status = tdcr_sweep(wb.get(), axis.c_str(), values.data(), values.size(),
                        dataset.c_str(), dynamics.c_str(), prefix.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "sweep");
  } else if (report->parsed()) {
    status = tdcr_render_report(wb.get(), table_json.c_str(), out_txt.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "report");
  } else if (dumpcfg->parsed()) {
    status = tdcr_dump_config(wb.get(), cfg_out.c_str());
    if (status != TDCR_OK) return report_failure(wb.get(), status, "dump-config");
  }
  return 0;
}
