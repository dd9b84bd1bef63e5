/* C ABI for the displace-learn toolkit. */

#ifndef DISPLACE_LEARN_H
#define DISPLACE_LEARN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a C-ABI call.
 */
typedef enum DlStatus {
  /**
   * Success.
   */
  DlStatus_Ok = 0,
  /**
   * A pointer argument was null.
   */
  DlStatus_NullPointer = 1,
  /**
   * Arguments violated a precondition.
   */
  DlStatus_InvalidInput = 2,
  /**
   * A bound was queried outside its hypotheses.
   */
  DlStatus_Inapplicable = 3,
  /**
   * File input/output failed.
   */
  DlStatus_Io = 4,
  /**
   * Internal panic caught at the boundary.
   */
  DlStatus_Panic = 5,
} DlStatus;

/**
 * Opaque record-set handle: a batch of Bell records plus the effective
 * squeezing its noise was simulated at.
 */
typedef struct DlRecordSet DlRecordSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes (excluding the terminator) of the last error message on
 * this thread.
 */
uintptr_t dl_last_error_length(void);

/**
 * Copies the last error message into `buf` (UTF-8, NUL-terminated).
 * Returns the number of bytes written excluding the terminator, or 0 when
 * `buf` is null or too small.
 *
 * # Safety
 * `buf` must point to at least `len` writable bytes.
 */
uintptr_t dl_last_error_message(char *buf, uintptr_t len);

/**
 * Crate version as a static NUL-terminated string.
 */
const char *dl_version(void);

/**
 * Effective squeezing after loss:
 * r_eff = −½·log(10^(−dB/10) + (1 − T_a)/T_a).
 *
 * # Safety
 * `out_r_eff` must be a valid pointer.
 */
enum DlStatus dl_effective_squeezing(double squeezing_db, double transmissivity, double *out_r_eff);

/**
 * Hoeffding sampling-complexity upper bound
 * 8·exp(2·e^(−2·r_eff)·|β|²)·ε⁻²·ln(4/δ).
 *
 * # Safety
 * `out_value` and `out_log10` must be valid pointers.
 */
enum DlStatus dl_hoeffding_upper(double r_eff,
                                 double beta_sq,
                                 double epsilon,
                                 double delta,
                                 double *out_value,
                                 double *out_log10);

/**
 * Entanglement-free lower bound 0.01·ε⁻²·(1 + 1.98κ/(1 + 2σ²))^(mn).
 * `out_hypothesis_ok` reports whether the width condition on σ holds.
 *
 * # Safety
 * The three output pointers must be valid.
 */
enum DlStatus dl_classical_lower(uint64_t m,
                                 uint64_t n,
                                 double kappa,
                                 double epsilon,
                                 double sigma,
                                 double *out_value,
                                 double *out_log10,
                                 bool *out_hypothesis_ok);

/**
 * Classical samples matching a measured success probability:
 * (2·P − 1)/(16ε₀²)·(1 + 1.98κ/(1 + 2σ²))ⁿ.
 *
 * # Safety
 * `out_value` and `out_log10` must be valid pointers.
 */
enum DlStatus dl_equivalent_classical_n(double p_suc,
                                        double epsilon0,
                                        double kappa,
                                        double sigma,
                                        uint64_t n,
                                        double *out_value,
                                        double *out_log10);

/**
 * Success ceiling of entanglement-free strategies with N samples,
 * clamped to 1; `out_excess` is the advantage term above ½.
 *
 * # Safety
 * `out_p` and `out_excess` must be valid pointers.
 */
enum DlStatus dl_classical_success_bound(double n_samples,
                                         double epsilon0,
                                         double kappa,
                                         double sigma,
                                         uint64_t n,
                                         double *out_p,
                                         double *out_excess);

/**
 * Acquisition wall-clock seconds for N samples of an n-mode process at
 * `mode_rate_hz` modes per second.
 *
 * # Safety
 * `out_seconds` must be a valid pointer.
 */
enum DlStatus dl_acquisition_time(double n_samples,
                                  uint64_t n_modes,
                                  double mode_rate_hz,
                                  double *out_seconds);

/**
 * Simulates `count` Bell records of the JSON-described process under ideal
 * drift. The returned handle owns the records; free it with
 * [`dl_record_set_free`].
 *
 * # Safety
 * `process_json` must be a NUL-terminated string and `out_handle` a valid
 * pointer.
 */
enum DlStatus dl_simulate_records(const char *process_json,
                                  double squeezing_db,
                                  double transmissivity,
                                  uintptr_t count,
                                  uint64_t seed,
                                  struct DlRecordSet **out_handle);

/**
 * Loads a record CSV written by the toolkit. The effective squeezing is
 * read from the metadata sidecar `<path with .meta.json>` when present,
 * else 0.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out_handle` a valid pointer.
 */
enum DlStatus dl_record_set_load_csv(const char *path, struct DlRecordSet **out_handle);

/**
 * Number of records in the set; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle from this library.
 */
uintptr_t dl_record_set_len(const struct DlRecordSet *handle);

/**
 * Modes per record; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle from this library.
 */
uintptr_t dl_record_set_modes(const struct DlRecordSet *handle);

/**
 * Effective squeezing the set was simulated (or loaded) with.
 *
 * # Safety
 * `handle` must be null or a live handle from this library.
 */
double dl_record_set_r_eff(const struct DlRecordSet *handle);

/**
 * Releases a record set. Null is a no-op.
 *
 * # Safety
 * `handle` must be null or a live handle from this library; it must not be
 * used afterwards.
 */
void dl_record_set_free(struct DlRecordSet *handle);

/**
 * Evaluates the unbiased characteristic-function estimator at β
 * (interleaved `[re, im] × n_modes`) using the handle's r_eff.
 *
 * # Safety
 * `handle` must be a live handle; `beta` must hold 2·n_modes doubles;
 * `out_re`/`out_im` must be valid pointers.
 */
enum DlStatus dl_estimate_char_fn(const struct DlRecordSet *handle,
                                  const double *beta,
                                  uintptr_t n_modes,
                                  double *out_re,
                                  double *out_im);

/**
 * Drift-corrected estimator; `affine` is the measured 2×2 distortion in
 * row-major order.
 *
 * # Safety
 * As [`dl_estimate_char_fn`], plus `affine` must hold 4 doubles.
 */
enum DlStatus dl_estimate_char_fn_corrected(const struct DlRecordSet *handle,
                                            const double *beta,
                                            uintptr_t n_modes,
                                            const double *affine,
                                            double *out_re,
                                            double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISPLACE_LEARN_H */
