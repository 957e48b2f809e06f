#ifndef CXR_PHASE_H
#define CXR_PHASE_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Feature map selector for [`cxr_features_map`].
typedef enum CxrFeature {
  // Phase angle in radians.
  CXR_FEATURE_LWPA = 0,
  // Unnormalized local phase energy.
  CXR_FEATURE_LPE = 1,
  CXR_FEATURE_ELEA = 2,
  CXR_FEATURE_TRANSMISSION = 3,
  CXR_FEATURE_MF_LWPA = 4,
  CXR_FEATURE_MF_LPE = 5,
  CXR_FEATURE_MF_ELEA = 6,
} CxrFeature;

// Scalar parameters addressable through [`cxr_config_set`].
typedef enum CxrParam {
  // Square working edge in pixels; 0 keeps the native size.
  CXR_PARAM_WORKING_SIZE = 0,
  CXR_PARAM_GUARD = 1,
  // 8 or 16.
  CXR_PARAM_OUTPUT_BIT_DEPTH = 2,
  CXR_PARAM_ALPHA = 3,
  CXR_PARAM_S0 = 4,
  CXR_PARAM_SCALE_MULTIPLIER = 5,
  CXR_PARAM_NUM_SCALES = 6,
  CXR_PARAM_LAMBDA = 7,
  CXR_PARAM_EPSILON = 8,
  CXR_PARAM_DELTA = 9,
  // NaN selects the mean of the LPE map.
  CXR_PARAM_RHO = 10,
} CxrParam;

// Result code returned by every fallible entry point.
typedef enum CxrStatus {
  CXR_STATUS_OK = 0,
  CXR_STATUS_NULL_POINTER = 1,
  CXR_STATUS_INVALID_ARGUMENT = 2,
  CXR_STATUS_IO = 3,
  CXR_STATUS_DECODE = 4,
  CXR_STATUS_CONFIG = 5,
  CXR_STATUS_NUMERIC = 6,
  CXR_STATUS_PANIC = 7,
} CxrStatus;

// Enhancement parameters.
typedef struct CxrConfig CxrConfig;

// Configuration plus a cache of filter banks reused across runs.
typedef struct CxrEnhancer CxrEnhancer;

// Output of one enhancement run.
typedef struct CxrFeatures CxrFeatures;

// Single-channel image with values stored as doubles, row-major.
typedef struct CxrImage CxrImage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library as a static NUL-terminated string.
const char *cxr_version(void);

// Default configuration.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum CxrStatus cxr_config_new(struct CxrConfig **out);

// Parses TOML text; omitted keys keep their defaults.
//
// # Safety
// `toml` must be NUL-terminated; `out` must be writable.
enum CxrStatus cxr_config_from_toml(const char *toml, struct CxrConfig **out);

// Reads a TOML file.
//
// # Safety
// `path` must be NUL-terminated; `out` must be writable.
enum CxrStatus cxr_config_load(const char *path, struct CxrConfig **out);

// Sets one parameter. The configuration is left unchanged if the new
// value fails validation.
//
// # Safety
// `config` must be a live handle.
enum CxrStatus cxr_config_set(struct CxrConfig *config, enum CxrParam param, double value);

// Reads one parameter. `Rho` reads as NaN when it tracks the LPE mean.
//
// # Safety
// `config` must be a live handle; `value` must be writable.
enum CxrStatus cxr_config_get(const struct CxrConfig *config, enum CxrParam param, double *value);

// Serializes the configuration as TOML. Release with [`cxr_string_free`].
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum CxrStatus cxr_config_to_toml(const struct CxrConfig *config, char **out);

// # Safety
// `config` must be NULL or a handle not yet freed.
void cxr_config_free(struct CxrConfig *config);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void cxr_string_free(char *s);

// Copies `width * height` finite doubles into a new image.
//
// # Safety
// `pixels` must point to `width * height` readable doubles.
enum CxrStatus cxr_image_new(size_t width,
                             size_t height,
                             const double *pixels,
                             struct CxrImage **out);

// Loads a PNG or PGM as grayscale in `[0, 1]`.
//
// # Safety
// `path` must be NUL-terminated; `out` must be writable.
enum CxrStatus cxr_image_load(const char *path, struct CxrImage **out);

// Writes a grayscale PNG. Pixels must lie in `[0, 1]`.
//
// # Safety
// `image` must be a live handle; `path` must be NUL-terminated.
enum CxrStatus cxr_image_save(const struct CxrImage *image, const char *path, uint32_t bits);

// Width in pixels, or 0 for NULL.
//
// # Safety
// `image` must be NULL or a live handle.
size_t cxr_image_width(const struct CxrImage *image);

// Height in pixels, or 0 for NULL.
//
// # Safety
// `image` must be NULL or a live handle.
size_t cxr_image_height(const struct CxrImage *image);

// Copies the pixels, row-major, into `dst`; `len` must equal
// `width * height`.
//
// # Safety
// `dst` must point to `len` writable doubles.
enum CxrStatus cxr_image_copy_pixels(const struct CxrImage *image, double *dst, size_t len);

// # Safety
// `image` must be NULL or a handle not yet freed.
void cxr_image_free(struct CxrImage *image);

// Creates an enhancer holding a copy of `config`.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum CxrStatus cxr_enhancer_new(const struct CxrConfig *config, struct CxrEnhancer **out);

// Runs the full pipeline on `image`. Filter banks are cached inside the
// enhancer, so repeated calls at one working size skip the setup cost.
// An enhancer may be used from several threads at once.
//
// # Safety
// `enhancer` and `image` must be live handles; `out` must be writable.
enum CxrStatus cxr_enhancer_run(const struct CxrEnhancer *enhancer,
                                const struct CxrImage *image,
                                struct CxrFeatures **out);

// # Safety
// `enhancer` must be NULL or a handle not yet freed.
void cxr_enhancer_free(struct CxrEnhancer *enhancer);

// Copies one feature map into a new image handle.
//
// # Safety
// `features` must be a live handle; `out` must be writable.
enum CxrStatus cxr_features_map(const struct CxrFeatures *features,
                                enum CxrFeature which,
                                struct CxrImage **out);

// Writes the 3-channel MF image as an RGB PNG.
//
// # Safety
// `features` must be a live handle; `path` must be NUL-terminated.
enum CxrStatus cxr_features_save_mf(const struct CxrFeatures *features,
                                    const char *path,
                                    uint32_t bits);

// Loads an MF PNG back into its three channels.
//
// # Safety
// `path` must be NUL-terminated; `out` must point to three writable
// handle slots.
enum CxrStatus cxr_mf_load(const char *path, struct CxrImage **out);

// Number of solver iterations performed, or 0 for NULL.
//
// # Safety
// `features` must be NULL or a live handle.
size_t cxr_features_solver_iterations(const struct CxrFeatures *features);

// Final regularization objective, or NaN for NULL.
//
// # Safety
// `features` must be NULL or a live handle.
double cxr_features_final_objective(const struct CxrFeatures *features);

// # Safety
// `features` must be NULL or a handle not yet freed.
void cxr_features_free(struct CxrFeatures *features);

// Message of the most recent failure on the calling thread, or NULL.
//
// The pointer stays valid until the next `cxr_*` call on the same thread.
const char *cxr_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CXR_PHASE_H */
