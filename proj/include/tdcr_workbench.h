/*
 * C API for the TDCR tracking workbench.
 *
 * The workbench handle is opaque; every operation returns a status code and
 * leaves a human-readable message retrievable with tdcr_last_error(). Paths
 * are resolved relative to the out_dir given at open time unless absolute.
 */
#ifndef TDCR_WORKBENCH_H
#define TDCR_WORKBENCH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tdcr_status {
  TDCR_OK = 0,
  TDCR_ERROR_INVALID_ARGUMENT = 1,
  TDCR_ERROR_IO = 2,
  TDCR_ERROR_FORMAT = 3,   /* corrupt/truncated/mismatched containers */
  TDCR_ERROR_NUMERIC = 4,  /* non-finite values, divergence */
  TDCR_ERROR_INTERNAL = 5
} tdcr_status;

typedef struct tdcr_workbench tdcr_workbench;

const char* tdcr_version(void);
const char* tdcr_status_name(tdcr_status status);

/* config_path may be NULL for built-in defaults. seed overrides the config's
 * master seed when nonzero. out_dir may be NULL / "" for the current
 * directory. */
tdcr_status tdcr_workbench_open(const char* config_path, uint64_t seed,
                                const char* out_dir, int verbose,
                                tdcr_workbench** out);
void tdcr_workbench_close(tdcr_workbench* wb);

/* Message for the most recent failing call on this handle. */
const char* tdcr_last_error(const tdcr_workbench* wb);

/* Writes the effective configuration (defaults + overrides) as JSON. */
tdcr_status tdcr_dump_config(tdcr_workbench* wb, const char* path);

tdcr_status tdcr_collect(tdcr_workbench* wb, const char* dataset_path);

tdcr_status tdcr_export_trajectory_csv(tdcr_workbench* wb, const char* dataset_path,
                                       uint64_t trajectory_index,
                                       const char* csv_path);

tdcr_status tdcr_train_dynamics(tdcr_workbench* wb, const char* dataset_path,
                                const char* checkpoint_path);

tdcr_status tdcr_train_policy(tdcr_workbench* wb, const char* dataset_path,
                              const char* dynamics_checkpoint, int augmentation,
                              const char* policy_checkpoint);

/* controller: "jacobian" or a policy checkpoint path.
 * backend: "plant" or "surrogate". */
tdcr_status tdcr_evaluate(tdcr_workbench* wb, const char* controller,
                          const char* backend, const char* dynamics_checkpoint,
                          const char* report_prefix);

tdcr_status tdcr_correlate(tdcr_workbench* wb, const char* const* policy_checkpoints,
                           size_t n_checkpoints, const char* dynamics_checkpoint,
                           const char* report_prefix);

/* axis: "np" or "nr"; values sorted ascending. */
tdcr_status tdcr_sweep(tdcr_workbench* wb, const char* axis, const int* values,
                       size_t n_values, const char* dataset_path,
                       const char* dynamics_checkpoint, const char* report_prefix);

/* Renders a report-table JSON file to fixed-layout text. */
tdcr_status tdcr_render_report(tdcr_workbench* wb, const char* table_json_path,
                               const char* out_txt_path);

#ifdef __cplusplus
}
#endif

#endif /* TDCR_WORKBENCH_H */
