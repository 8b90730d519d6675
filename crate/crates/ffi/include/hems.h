#ifndef HEMS_H
#define HEMS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HemsStatus {
  HEMS_STATUS_OK = 0,
  HEMS_STATUS_NULL_POINTER = 1,
  HEMS_STATUS_INVALID_ARGUMENT = 2,
  HEMS_STATUS_CONFIG = 3,
  HEMS_STATUS_SIMULATION = 4,
  HEMS_STATUS_SOLVER = 5,
  /**
   * The solver hit its limit before finding any integer point.
   */
  HEMS_STATUS_NO_INCUMBENT = 6,
  HEMS_STATUS_PANIC = 7,
} HemsStatus;

typedef enum HemsMilpStatus {
  HEMS_MILP_STATUS_OPTIMAL = 0,
  HEMS_MILP_STATUS_TIME_LIMIT = 1,
  HEMS_MILP_STATUS_NODE_LIMIT = 2,
  HEMS_MILP_STATUS_INFEASIBLE = 3,
  HEMS_MILP_STATUS_UNBOUNDED = 4,
} HemsMilpStatus;

typedef enum HemsController {
  HEMS_CONTROLLER_BASELINE = 0,
  HEMS_CONTROLLER_RULE_BASED = 1,
  HEMS_CONTROLLER_MPC = 2,
} HemsController;

typedef enum HemsSense {
  HEMS_SENSE_LE = 0,
  HEMS_SENSE_EQ = 1,
  HEMS_SENSE_GE = 2,
} HemsSense;

/**
 * Opaque scenario configuration.
 */
typedef struct HemsConfig HemsConfig;

/**
 * Opaque MILP under construction.
 */
typedef struct HemsMilp HemsMilp;

/**
 * Opaque finished simulation.
 */
typedef struct HemsRun HemsRun;

/**
 * Run metrics. Undefined ratios are NaN.
 */
typedef struct HemsMetrics {
  double lrm_cri;
  double lrm_o;
  double trm_h;
  uint64_t trip_steps;
  /**
   * NaN for controllers that do not solve anything.
   */
  double mean_solve_ms;
  uint64_t fallback_steps;
} HemsMetrics;

typedef struct HemsMilpResult {
  enum HemsMilpStatus status;
  double objective;
  double bound;
  double gap;
  uint64_t nodes;
  double wall_time_s;
} HemsMilpResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hems_last_error(void);

/**
 * Default configuration (all grid factors 1, `alpha_i` 4).
 */
struct HemsConfig *hems_config_new(void);

/**
 * # Safety
 * `cfg` must come from [`hems_config_new`] and not be freed yet, or be null.
 */
void hems_config_free(struct HemsConfig *cfg);

/**
 * Set one configuration key, written as in a TOML config file
 * (`value` is a TOML literal, e.g. `"0.5"` or `"36"`).
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum HemsStatus hems_config_set(struct HemsConfig *cfg, const char *key, const char *value);

/**
 * Switch to desk-scale MPC settings.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum HemsStatus hems_config_desk(struct HemsConfig *cfg);

/**
 * Simulate `days` of synthetic data from `seed` with a [`HemsController`]
 * value. On success `*out` owns a new run handle.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum HemsStatus hems_run_synthetic(const struct HemsConfig *cfg,
                                   int32_t controller,
                                   uint64_t seed,
                                   uint32_t days,
                                   struct HemsRun **out);

/**
 * # Safety
 * `run` must come from [`hems_run_synthetic`] and not be freed yet, or be null.
 */
void hems_run_free(struct HemsRun *run);

/**
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum HemsStatus hems_run_metrics(const struct HemsRun *run, struct HemsMetrics *out);

/**
 * Number of simulated steps, 0 for a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
size_t hems_run_len(const struct HemsRun *run);

/**
 * Copy the post-step house temperature and battery energy of the first
 * `len` steps. Either output may be null.
 *
 * # Safety
 * `run` must be a live handle; non-null outputs must hold `len` values.
 */
enum HemsStatus hems_run_states(const struct HemsRun *run,
                                double *t_house_c,
                                double *e_bat_kwh,
                                size_t len);

struct HemsMilp *hems_milp_new(void);

/**
 * # Safety
 * `p` must come from [`hems_milp_new`] and not be freed yet, or be null.
 */
void hems_milp_free(struct HemsMilp *p);

/**
 * Append a column; `*index` receives its position. Binary columns ignore
 * the bounds and use [0, 1].
 *
 * # Safety
 * `p` must be a live handle; `index` may be null.
 */
enum HemsStatus hems_milp_add_column(struct HemsMilp *p,
                                     double lower,
                                     double upper,
                                     double cost,
                                     bool binary,
                                     size_t *index);

/**
 * Append the row `sum(coeffs[i] * x[cols[i]]) <sense> rhs`, `sense` being a
 * [`HemsSense`] value.
 *
 * # Safety
 * `p` must be a live handle; `cols` and `coeffs` must hold `nnz` values.
 */
enum HemsStatus hems_milp_add_row(struct HemsMilp *p,
                                  const size_t *cols,
                                  const double *coeffs,
                                  size_t nnz,
                                  int32_t sense,
                                  double rhs);

/**
 * Solve the problem. `node_limit` 0 means no node cap. When `columns` is
 * not null it receives `ncols` values, which must equal the column count.
 *
 * # Safety
 * `p` must be a live handle, `out` valid, `columns` null or `ncols` long.
 */
enum HemsStatus hems_milp_solve(const struct HemsMilp *p,
                                double mip_gap,
                                double time_limit_s,
                                uint64_t node_limit,
                                struct HemsMilpResult *out,
                                double *columns,
                                size_t ncols);

/**
 * Circuit bits (0/1) for an energy budget over `n` demands in priority order.
 *
 * # Safety
 * `demands` and `bits` must hold `n` values.
 */
enum HemsStatus hems_priority_stack(double budget_kwh,
                                    const double *demands,
                                    size_t n,
                                    uint8_t *bits);

/**
 * Hysteresis thermostat: on at or above `t_upper_c`, off at or below
 * `t_lower_c`, otherwise `ac_prev`.
 */
bool hems_thermostat(double t_house_c, bool ac_prev, double t_upper_c, double t_lower_c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEMS_H */
