#ifndef HALFWAVE_H
#define HALFWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HwStatus {
  HW_STATUS_OK = 0,
  HW_STATUS_NULL_POINTER = 1,
  HW_STATUS_INVALID_ARGUMENT = 2,
  HW_STATUS_NO_CRITICAL_ANGLE = 3,
  HW_STATUS_DOMAIN_TOUCHES_SINGULARITY = 4,
  HW_STATUS_NON_CONVERGENCE = 5,
  HW_STATUS_INSUFFICIENT_DATA = 6,
  HW_STATUS_GRID_ERROR = 7,
  HW_STATUS_IO = 8,
  HW_STATUS_PANIC = 9,
} HwStatus;

typedef enum HwVerdictKind {
  HW_VERDICT_KIND_DIVERGENT = 0,
  HW_VERDICT_KIND_BOUNDED = 1,
  HW_VERDICT_KIND_INCONCLUSIVE = 2,
} HwVerdictKind;

/**
 * Opaque radial cutoff.
 */
typedef struct HwMollifier HwMollifier;

/**
 * Opaque time profile.
 */
typedef struct HwProfile HwProfile;

/**
 * Reduced-functional configuration. `unbounded != 0` drops the cutoff and
 * ignores `level`.
 */
typedef struct HwProbeConfig {
  uint32_t n;
  double c;
  double s;
  int32_t level;
  int32_t unbounded;
  double domain_start;
  double domain_end;
} HwProbeConfig;

/**
 * Probe summary. Fields that do not apply to `kind` are NaN.
 */
typedef struct HwProbeResult {
  enum HwVerdictKind kind;
  double slope;
  double slope_stderr;
  double limit_estimate;
  double tail_bound;
  /**
   * Number of levels evaluated.
   */
  size_t levels;
  /**
   * Last computed `Q_k`, NaN if none.
   */
  double last_value;
} HwProbeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *hw_version(void);

/**
 * Message of the last failure on this thread (empty if none). The pointer
 * stays valid until the next failing call on the same thread. An
 * inconclusive probe also leaves its reason here.
 */
const char *hw_last_error_message(void);

/**
 * The unit-L² Gaussian.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HwStatus hw_profile_default(struct HwProfile **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum HwStatus hw_profile_gaussian(double width, struct HwProfile **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum HwStatus hw_profile_bump(double center, double radius, struct HwProfile **out);

/**
 * Parses the CLI form, e.g. `gaussian:width=1` or `bump:center=0,radius=1`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string, `out` valid for writes.
 */
enum HwStatus hw_profile_parse(const char *spec, struct HwProfile **out);

/**
 * New handle for `alpha · f(t/mu)`.
 *
 * # Safety
 * `p` must be a live handle, `out` valid for writes.
 */
enum HwStatus hw_profile_transform(const struct HwProfile *p,
                                   double alpha,
                                   double mu,
                                   struct HwProfile **out);

/**
 * # Safety
 * `p` must come from a `hw_profile_*` constructor and not be freed twice.
 * Null is ignored.
 */
void hw_profile_free(struct HwProfile *p);

/**
 * `f̂(η)` as real and imaginary parts.
 *
 * # Safety
 * `p` must be a live handle, `re` and `im` valid for writes.
 */
enum HwStatus hw_profile_fhat(const struct HwProfile *p, double eta, double *re, double *im);

/**
 * `∫_0^∞ |f̂(η)|² dη`.
 *
 * # Safety
 * `p` must be a live handle, `out` valid for writes.
 */
enum HwStatus hw_profile_energy(const struct HwProfile *p, double tol, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum HwStatus hw_mollifier_new(double inner, double outer, struct HwMollifier **out);

/**
 * # Safety
 * `m` must come from [`hw_mollifier_new`] and not be freed twice. Null is
 * ignored.
 */
void hw_mollifier_free(struct HwMollifier *m);

/**
 * `χ(|η|)`.
 *
 * # Safety
 * `m` must be a live handle, `out` valid for writes.
 */
enum HwStatus hw_mollifier_eval(const struct HwMollifier *m, double eta, double *out);

/**
 * `arccos(-1/c)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HwStatus hw_critical_angle(double c, double *out);

/**
 * `|S^m|`.
 */
double hw_sphere_surface_measure(uint32_t m);

/**
 * `∫ (sin θ)^{n-2}/|1 + c cos θ| dθ` over `[start, end]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HwStatus hw_angular_integral(uint32_t n,
                                  double c,
                                  double start,
                                  double end,
                                  double tol,
                                  double *out);

/**
 * `Q_k` for `cfg`.
 *
 * # Safety
 * `cfg`, `p` and `m` must be valid, `out` valid for writes.
 */
enum HwStatus hw_reduced_q_value(const struct HwProbeConfig *cfg,
                                 const struct HwProfile *p,
                                 const struct HwMollifier *m,
                                 double tol,
                                 double *out);

/**
 * `E(f) · ∫ (sin θ)^{n-2}/(1 + c cos θ) dθ` over a subcritical domain.
 *
 * # Safety
 * `p` must be a live handle, `out` valid for writes.
 */
enum HwStatus hw_factorized_value(uint32_t n,
                                  double c,
                                  const struct HwProfile *p,
                                  double start,
                                  double end,
                                  double tol,
                                  double *out);

/**
 * The three-dimensional remark at `ε`: `E · ln(2/ε)` and its quadrature.
 *
 * # Safety
 * `p` must be a live handle, the outputs valid for writes.
 */
enum HwStatus hw_n3_remark(double eps,
                           const struct HwProfile *p,
                           double tol,
                           double *closed_form,
                           double *quadrature);

/**
 * `ln 2 · (sin θ₀)^{n-3}/c · energy`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HwStatus hw_slope_law(uint32_t n, double c, double energy, double *out);

/**
 * Endpoint probe on `[π/2, θ₀]` for levels `0..=kmax`.
 *
 * # Safety
 * `p` and `m` must be live handles, `out` valid for writes.
 */
enum HwStatus hw_falsification_probe(uint32_t n,
                                     double c,
                                     const struct HwProfile *p,
                                     const struct HwMollifier *m,
                                     int32_t kmax,
                                     struct HwProbeResult *out);

/**
 * Probe at `s = n/2 - 1/q` on `[π/2, θ₀]` for levels `0..=kmax`.
 *
 * # Safety
 * `p` and `m` must be live handles, `out` valid for writes.
 */
enum HwStatus hw_boundedness_probe(uint32_t n,
                                   double q,
                                   double c,
                                   const struct HwProfile *p,
                                   const struct HwMollifier *m,
                                   int32_t kmax,
                                   struct HwProbeResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HALFWAVE_H */
