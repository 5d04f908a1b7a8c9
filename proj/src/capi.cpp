#include "tdcr_workbench.h"

#include <memory>
#include <string>

#include "tdcr/errors.hpp"
#include "tdcr/workbench.hpp"

struct tdcr_workbench {
  std::unique_ptr<tdcr::Workbench> impl;
  std::string last_error;
};

namespace {

tdcr_status status_from_kind(tdcr::ErrorKind kind) {
  switch (kind) {
    case tdcr::ErrorKind::invalid_argument:
      return TDCR_ERROR_INVALID_ARGUMENT;
    case tdcr::ErrorKind::io:
      return TDCR_ERROR_IO;
    case tdcr::ErrorKind::corrupt_header:
    case tdcr::ErrorKind::truncated_record:
    case tdcr::ErrorKind::version_mismatch:
      return TDCR_ERROR_FORMAT;
    case tdcr::ErrorKind::numeric:
    case tdcr::ErrorKind::divergence:
      return TDCR_ERROR_NUMERIC;
  }
  return TDCR_ERROR_INTERNAL;
}

template <typename Fn>
tdcr_status guarded(tdcr_workbench* wb, Fn&& fn) {
  if (!wb) return TDCR_ERROR_INVALID_ARGUMENT;
  try {
    fn();
    wb->last_error.clear();
    return TDCR_OK;
  } catch (const tdcr::Error& e) {
    wb->last_error = e.what();
    return status_from_kind(e.kind());
  } catch (const std::exception& e) {
    wb->last_error = e.what();
    return TDCR_ERROR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* tdcr_version(void) { return "1.0.0"; }

const char* tdcr_status_name(tdcr_status status) {
  switch (status) {
    case TDCR_OK: return "ok";
    case TDCR_ERROR_INVALID_ARGUMENT: return "invalid_argument";
    case TDCR_ERROR_IO: return "io";
    case TDCR_ERROR_FORMAT: return "format";
    case TDCR_ERROR_NUMERIC: return "numeric";
    case TDCR_ERROR_INTERNAL: return "internal";
  }
  return "unknown";
}

tdcr_status tdcr_workbench_open(const char* config_path, uint64_t seed,
                                const char* out_dir, int verbose,
                                tdcr_workbench** out) {
  if (!out) return TDCR_ERROR_INVALID_ARGUMENT;
  *out = nullptr;
  auto wb = std::make_unique<tdcr_workbench>();
  try {
    tdcr::WorkbenchConfig cfg = config_path && *config_path
                                    ? tdcr::load_config(config_path)
                                    : tdcr::default_config();
    if (seed != 0) cfg.master_seed = seed;
    wb->impl = std::make_unique<tdcr::Workbench>(
        std::move(cfg), out_dir ? std::string(out_dir) : std::string(), verbose != 0);
  } catch (const tdcr::Error& e) {
    return status_from_kind(e.kind());
  } catch (const std::exception&) {
    return TDCR_ERROR_INTERNAL;
  }
  *out = wb.release();
  return TDCR_OK;
}

void tdcr_workbench_close(tdcr_workbench* wb) { delete wb; }

const char* tdcr_last_error(const tdcr_workbench* wb) {
  return wb ? wb->last_error.c_str() : "";
}

tdcr_status tdcr_dump_config(tdcr_workbench* wb, const char* path) {
  return guarded(wb, [&] {
    if (!path) tdcr::fail(tdcr::ErrorKind::invalid_argument, "path is null");
    tdcr::save_config(wb->impl->config(), path);
  });
}

tdcr_status tdcr_collect(tdcr_workbench* wb, const char* dataset_path) {
  return guarded(wb, [&] {
    if (!dataset_path) tdcr::fail(tdcr::ErrorKind::invalid_argument, "dataset path is null");
    wb->impl->collect(dataset_path);
  });
}

tdcr_status tdcr_export_trajectory_csv(tdcr_workbench* wb, const char* dataset_path,
                                       uint64_t trajectory_index, const char* csv_path) {
  return guarded(wb, [&] {
    if (!dataset_path || !csv_path)
      tdcr::fail(tdcr::ErrorKind::invalid_argument, "path is null");
    wb->impl->export_csv(dataset_path, static_cast<int>(trajectory_index), csv_path);
  });
}

tdcr_status tdcr_train_dynamics(tdcr_workbench* wb, const char* dataset_path,
                                const char* checkpoint_path) {
  return guarded(wb, [&] {
    if (!dataset_path || !checkpoint_path)
      tdcr::fail(tdcr::ErrorKind::invalid_argument, "path is null");
    wb->impl->train_dynamics(dataset_path, checkpoint_path);
  });
}

tdcr_status tdcr_train_policy(tdcr_workbench* wb, const char* dataset_path,
                              const char* dynamics_checkpoint, int augmentation,
                              const char* policy_checkpoint) {
  return guarded(wb, [&] {
    if (!dataset_path || !dynamics_checkpoint || !policy_checkpoint)
      tdcr::fail(tdcr::ErrorKind::invalid_argument, "path is null");
    wb->impl->train_policy_cmd(dataset_path, dynamics_checkpoint, augmentation != 0,
                               policy_checkpoint);
  });
}

tdcr_status tdcr_evaluate(tdcr_workbench* wb, const char* controller,
                          const char* backend, const char* dynamics_checkpoint,
                          const char* report_prefix) {
  return guarded(wb, [&] {
    if (!controller || !backend || !dynamics_checkpoint || !report_prefix)
      tdcr::fail(tdcr::ErrorKind::invalid_argument, "argument is null");
    wb->impl->evaluate_cmd(controller, backend, dynamics_checkpoint, report_prefix);
  });
}

tdcr_status tdcr_correlate(tdcr_workbench* wb, const char* const* policy_checkpoints,
                           size_t n_checkpoints, const char* dynamics_checkpoint,
                           const char* report_prefix) {
  return guarded(wb, [&] {
    if (!policy_checkpoints || !dynamics_checkpoint || !report_prefix)
      tdcr::fail(tdcr::ErrorKind::invalid_argument, "argument is null");
    std::vector<std::string> paths;
    for (size_t i = 0; i < n_checkpoints; ++i) {
      if (!policy_checkpoints[i])
        tdcr::fail(tdcr::ErrorKind::invalid_argument, "checkpoint path is null");
      paths.emplace_back(policy_checkpoints[i]);
    }
    wb->impl->correlate_cmd(paths, dynamics_checkpoint, report_prefix);
  });
}

tdcr_status tdcr_sweep(tdcr_workbench* wb, const char* axis, const int* values,
                       size_t n_values, const char* dataset_path,
                       const char* dynamics_checkpoint, const char* report_prefix) {
  return guarded(wb, [&] {
    if (!axis || !values || !dataset_path || !dynamics_checkpoint || !report_prefix)
      tdcr::fail(tdcr::ErrorKind::invalid_argument, "argument is null");
    wb->impl->sweep_cmd(axis, std::vector<int>(values, values + n_values),
                        dataset_path, dynamics_checkpoint, report_prefix);
  });
}

tdcr_status tdcr_render_report(tdcr_workbench* wb, const char* table_json_path,
                               const char* out_txt_path) {
  return guarded(wb, [&] {
    if (!table_json_path || !out_txt_path)
      tdcr::fail(tdcr::ErrorKind::invalid_argument, "path is null");
    tdcr::Workbench::render_report_file(table_json_path, out_txt_path);
  });
}

}  // extern "C"
