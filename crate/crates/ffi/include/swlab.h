#ifndef SWLAB_H
#define SWLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>
#include <stddef.h>

typedef enum SwlabStatus {
  SWLAB_STATUS_OK = 0,
  /*
   Null pointer, bad UTF-8, undersized buffer or unknown name.
   */
  SWLAB_STATUS_INVALID_ARGUMENT = 1,
  /*
   Spec, parameter or model validation failure.
   */
  SWLAB_STATUS_VALIDATION = 2,
  /*
   A numerical guard tripped (resonance, small denominator, bin merge).
   */
  SWLAB_STATUS_NUMERICAL = 3,
  /*
   An internal panic was caught.
   */
  SWLAB_STATUS_INTERNAL = 4,
} SwlabStatus;

typedef enum SwlabVariant {
  SWLAB_VARIANT_BLOCK_DIAGONAL = 0,
  SWLAB_VARIANT_SINGLE_GENERATOR = 1,
  SWLAB_VARIANT_MATRIX_FORM = 2,
} SwlabVariant;

/*
 A model: `H0`, `V` and a block partition.
 */
typedef struct SwlabModel SwlabModel;

/*
 Output of a transformation.
 */
typedef struct SwlabResult SwlabResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the
 next failing call on the same thread.
 */
const char *swlab_last_error(void);

/*
 Library version as a static string.
 */
const char *swlab_version(void);

/*
 Builds a model from a model-spec JSON document.

 # Safety
 `spec_json` must be a nul-terminated string and `out` a valid pointer.
 */
enum SwlabStatus swlab_model_from_json(const char *spec_json, struct SwlabModel **out);

/*
 Builds a preset with default parameters.

 # Safety
 `name` must be a nul-terminated string and `out` a valid pointer.
 */
enum SwlabStatus swlab_model_preset(const char *name, struct SwlabModel **out);

/*
 Hilbert-space dimension, or 0 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
uintptr_t swlab_model_dim(const struct SwlabModel *model);

/*
 # Safety
 `model` must be null or a handle not yet freed.
 */
void swlab_model_free(struct SwlabModel *model);

/*
 Runs the transformation at the given order and variant.

 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum SwlabStatus swlab_transform(const struct SwlabModel *model,
                                 uintptr_t order,
                                 enum SwlabVariant variant,
                                 struct SwlabResult **out);

/*
 Writes `H'` row-major into `re` and `im`, each of length at least dim².

 # Safety
 `result` must be a live handle; `re` and `im` must point to `len` doubles.
 */
enum SwlabStatus swlab_result_hprime(const struct SwlabResult *result,
                                     double *re,
                                     double *im,
                                     uintptr_t len);

/*
 Writes the generator `S` row-major into `re` and `im`.

 # Safety
 As for [`swlab_result_hprime`].
 */
enum SwlabStatus swlab_result_generator(const struct SwlabResult *result,
                                        double *re,
                                        double *im,
                                        uintptr_t len);

/*
 Largest inter-block entry of the exact rotation, or NaN for a null handle.

 # Safety
 `result` must be null or a live handle.
 */
double swlab_result_offdiag_residual(const struct SwlabResult *result);

/*
 # Safety
 `result` must be null or a handle not yet freed.
 */
void swlab_result_free(struct SwlabResult *result);

/*
 Runs `decompose`, `transform`, `compare` or `sweep` on a model-spec
 document and returns the JSON report. Free it with [`swlab_string_free`].

 # Safety
 `command` and `spec_json` must be nul-terminated strings; `out` a valid pointer.
 */
enum SwlabStatus swlab_run_json(const char *command, const char *spec_json, char **out);

/*
 # Safety
 `s` must be null or a string returned by this library and not yet freed.
 */
void swlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWLAB_H */
