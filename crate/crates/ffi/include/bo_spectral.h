#ifndef BO_SPECTRAL_H
#define BO_SPECTRAL_H

#include <stddef.h>
#include <stdint.h>

// Status codes returned by every fallible call.
typedef enum BoStatus {
  BO_STATUS_OK = 0,
  // A required pointer argument was null.
  BO_STATUS_NULL_POINTER = 1,
  // A parameter was out of range or inconsistent.
  BO_STATUS_INVALID_ARGUMENT = 2,
  // A numerical check failed (eigensolver, unresolved tail, ...).
  BO_STATUS_NUMERICAL = 3,
  // The time stepper exceeded its stability policy or blew up.
  BO_STATUS_UNSTABLE = 4,
  // The output buffer is too small; the required length was written.
  BO_STATUS_BUFFER_TOO_SMALL = 5,
  // A panic was caught at the boundary.
  BO_STATUS_INTERNAL = 6,
} BoStatus;

// Opaque real zero-mean trigonometric polynomial.
typedef struct BoField BoField;

// Opaque spectral data of the truncated Lax operator.
typedef struct BoSpectrum BoSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *bo_last_error(void);

// Library version as a static NUL-terminated string.
const char *bo_version(void);

// Builds a field from its positive modes `c_1..c_n`, given as `2n` doubles.
//
// # Safety
// `modes` must point to `2 * n_modes` readable doubles and `out` must be
// a valid pointer.
enum BoStatus bo_field_from_modes(const double *modes, size_t n_modes, struct BoField **out);

// Traveling-wave potential with `c_k = alpha^k`, truncated where the modes
// reach round-off.
//
// # Safety
// `out` must be a valid pointer.
enum BoStatus bo_field_one_gap(double alpha_re, double alpha_im, struct BoField **out);

// Seeded random field of the given bandwidth rescaled to `||u||_0 = norm`.
//
// # Safety
// `out` must be a valid pointer.
enum BoStatus bo_field_random(uint64_t seed, size_t bandwidth, double norm, struct BoField **out);

// # Safety
// `field` must be a handle from this library or null.
void bo_field_free(struct BoField *field);

// Bandwidth of the field, or 0 for a null handle.
//
// # Safety
// `field` must be a live handle or null.
size_t bo_field_bandwidth(const struct BoField *field);

// Writes the positive modes `c_1..c_N` into `out` (`2N` doubles).
//
// # Safety
// `field` must be live, `out` must hold `cap` doubles and `len` must be valid.
enum BoStatus bo_field_modes(const struct BoField *field, double *out, size_t cap, size_t *len);

// Mean square `||u||_0^2 = sum_k |c_k|^2` over all modes.
//
// # Safety
// `field` must be a live handle.
double bo_field_mean_square(const struct BoField *field);

// Gauge transform: writes the modes `w_1..w_K` of the mean-free Hardy
// element.
//
// # Safety
// As for [`bo_field_modes`].
enum BoStatus bo_gauge(const struct BoField *field, double *out, size_t cap, size_t *len);

// Evolves the field to time `t_final` on a dealiased grid of the given
// bandwidth and returns the final state as a new handle.
//
// # Safety
// `field` must be live and `out` valid.
enum BoStatus bo_evolve(const struct BoField *field,
                        size_t bandwidth,
                        double dt,
                        double t_final,
                        struct BoField **out);

// Eigen-decomposition of the Lax operator truncated to `m` modes.
//
// # Safety
// `field` must be live and `out` valid.
enum BoStatus bo_spectrum_new(const struct BoField *field, size_t m, struct BoSpectrum **out);

// # Safety
// `spec` must be a handle from this library or null.
void bo_spectrum_free(struct BoSpectrum *spec);

// Size `P` of the trusted index range `1..=P`, or 0 for a null handle.
//
// # Safety
// `spec` must be live or null.
size_t bo_spectrum_trusted(const struct BoSpectrum *spec);

// Eigenvalues `lambda_0..lambda_P` of the trusted range.
//
// # Safety
// `spec` must be live, `out` must hold `cap` doubles and `len` be valid.
enum BoStatus bo_spectrum_eigenvalues(const struct BoSpectrum *spec,
                                      double *out,
                                      size_t cap,
                                      size_t *len);

// Gaps `gamma_1..gamma_P`.
//
// # Safety
// As for [`bo_spectrum_eigenvalues`].
enum BoStatus bo_spectrum_gaps(const struct BoSpectrum *spec, double *out, size_t cap, size_t *len);

// Birkhoff coordinates `zeta_1..zeta_P` as interleaved pairs.
//
// # Safety
// As for [`bo_spectrum_eigenvalues`].
enum BoStatus bo_spectrum_birkhoff(const struct BoSpectrum *spec,
                                   double *out,
                                   size_t cap,
                                   size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BO_SPECTRAL_H */
