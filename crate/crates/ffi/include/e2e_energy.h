#ifndef E2E_ENERGY_H
#define E2E_ENERGY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum E2eStatus {
  E2E_STATUS_OK = 0,
  E2E_STATUS_NULL_POINTER = 1,
  E2E_STATUS_INVALID_ARGUMENT = 2,
  E2E_STATUS_PARSE = 3,
  E2E_STATUS_VALIDATION = 4,
  E2E_STATUS_DOMAIN = 5,
  E2E_STATUS_SATURATION = 6,
  E2E_STATUS_IO = 7,
  E2E_STATUS_PANIC = 8,
} E2eStatus;

/**
 * Opaque parameter bundle.
 */
typedef struct E2eConfig E2eConfig;

/**
 * Opaque wired scenario.
 */
typedef struct E2eModel E2eModel;

/**
 * One solved rate point. Power fields are NaN when `feasible` is false.
 */
typedef struct E2ePoint {
  bool feasible;
  double total_power_w;
  double ee;
  double p_mbs_w;
  double p_bmaa_w;
  double p_iap_w;
} E2ePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t e2e_last_error(char *buf, size_t len);

/**
 * Default parameter bundle.
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum E2eStatus e2e_config_default(struct E2eConfig **out);

/**
 * Load and validate a config file; environment overrides apply.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` null or valid.
 */
enum E2eStatus e2e_config_load(const char *path, struct E2eConfig **out);

/**
 * Parse config text and validate it.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` null or valid.
 */
enum E2eStatus e2e_config_parse(const char *text, struct E2eConfig **out);

/**
 * Set `section.key` from its textual value. The bundle is validated when a
 * model is built.
 *
 * # Safety
 * `cfg` must come from this library; strings must be NUL-terminated.
 */
enum E2eStatus e2e_config_set(struct E2eConfig *cfg,
                              const char *section,
                              const char *key,
                              const char *value);

/**
 * # Safety
 * `cfg` must be null or come from this library and not be used afterwards.
 */
void e2e_config_free(struct E2eConfig *cfg);

/**
 * Wire a scenario. `variant` such as `sep-lifi@128` overrides the
 * configured separation, access kind and M_T; pass null to keep them.
 *
 * # Safety
 * `cfg` must come from this library; `variant` null or NUL-terminated;
 * `out` null or valid.
 */
enum E2eStatus e2e_model_build(const struct E2eConfig *cfg,
                               const char *variant,
                               uint64_t seed,
                               struct E2eModel **out);

/**
 * Solve one offered total rate in bit/s. Infeasibility is reported through
 * `out.feasible`, not the status.
 *
 * # Safety
 * `model` must come from this library; `out` null or valid.
 */
enum E2eStatus e2e_model_solve(const struct E2eModel *model,
                               double total_rate,
                               struct E2ePoint *out);

/**
 * # Safety
 * `model` must be null or come from this library and not be used afterwards.
 */
void e2e_model_free(struct E2eModel *model);

double e2e_fejer_kernel(size_t m, double x);

double e2e_required_sinr(double se, double gamma);

double e2e_snr_macro(double beta, size_t m_t, size_t m_r, double p_sig, double sigma2);

/**
 * # Safety
 * `out` must be null or valid.
 */
enum E2eStatus e2e_pathloss_winner_b5a(double d, double f_c_ghz, double *out);

/**
 * # Safety
 * `out` must be null or valid.
 */
enum E2eStatus e2e_lambertian_order(double half_angle, double *out);

/**
 * # Safety
 * `out` must be null or valid.
 */
enum E2eStatus e2e_pa_power_doherty(double p_out, double p_max, double *out);

/**
 * # Safety
 * `out` must be null or valid.
 */
enum E2eStatus e2e_pa_power_classb(double p_out, double p_max, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* E2E_ENERGY_H */
