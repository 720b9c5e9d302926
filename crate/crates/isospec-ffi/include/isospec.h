#ifndef ISOSPEC_H
#define ISOSPEC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum IsoStatus {
  ISO_STATUS_OK = 0,
  ISO_STATUS_NULL_POINTER = 1,
  ISO_STATUS_INVALID_UTF8 = 2,
  ISO_STATUS_UNKNOWN_COMPLEX = 3,
  ISO_STATUS_INVALID_COMPLEX = 4,
  ISO_STATUS_INVALID_METRIC = 5,
  ISO_STATUS_GEOMETRY = 6,
  ISO_STATUS_OUT_OF_RANGE = 7,
  ISO_STATUS_MISMATCH = 8,
  ISO_STATUS_INTERNAL = 9,
} IsoStatus;

/**
 * A complex together with its solved block geometry.
 */
typedef struct IsoComplex IsoComplex;

/**
 * A banded length spectrum.
 */
typedef struct IsoSpectrum IsoSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t iso_last_error(char *buf, size_t len);

/**
 * Load one of the bundled complexes by name ("s1", "x1_triple", ...).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IsoStatus iso_complex_load_bundled(const char *name, struct IsoComplex **out);

/**
 * Load a complex from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IsoStatus iso_complex_load_json(const char *json, struct IsoComplex **out);

/**
 * Change the block parameters of a complex in place.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum IsoStatus iso_complex_set_metric(struct IsoComplex *h, double b, double c);

/**
 * Release a complex. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void iso_complex_free(struct IsoComplex *h);

/**
 * Euler characteristic of the complex.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum IsoStatus iso_complex_euler(const struct IsoComplex *h, int64_t *out);

/**
 * Number of chambers of an amalgam.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum IsoStatus iso_complex_chambers(const struct IsoComplex *h, size_t *out);

/**
 * Length of the a-sides of the right-angled octagon with parameters (b, c).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IsoStatus iso_octagon_a(double b, double c, double *out);

/**
 * Length spectrum up to `cutoff`, banded with tolerance `tol`.
 * `max_crossings` = 0 selects ceil(cutoff / c).
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum IsoStatus iso_spectrum_build(const struct IsoComplex *h,
                                  double cutoff,
                                  double tol,
                                  size_t max_crossings,
                                  struct IsoSpectrum **out);

/**
 * Number of bands.
 *
 * # Safety
 * `s` must be a live handle.
 */
size_t iso_spectrum_len(const struct IsoSpectrum *s);

/**
 * Length and multiplicity of band `i`.
 *
 * # Safety
 * `s` must be a live handle; `length` and `multiplicity` valid pointers.
 */
enum IsoStatus iso_spectrum_band(const struct IsoSpectrum *s,
                                 size_t i,
                                 double *length,
                                 size_t *multiplicity);

/**
 * Whether two spectra agree, with multiplicities (`weak` = 0) or as sets.
 *
 * # Safety
 * `a`, `b` must be live handles and `equal` a valid pointer.
 */
enum IsoStatus iso_spectrum_compare(const struct IsoSpectrum *a,
                                    const struct IsoSpectrum *b,
                                    bool weak,
                                    bool *equal);

/**
 * Release a spectrum. Null is ignored.
 *
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void iso_spectrum_free(struct IsoSpectrum *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOSPEC_H */
