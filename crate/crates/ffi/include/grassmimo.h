#ifndef GRASSMIMO_H
#define GRASSMIMO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_INVALID_ARGUMENT = 1,
  GM_STATUS_UNSUPPORTED = 2,
  GM_STATUS_DIMENSION_MISMATCH = 3,
  GM_STATUS_SINGULAR = 4,
  GM_STATUS_UNREPRESENTABLE = 5,
  GM_STATUS_NULL_POINTER = 6,
  GM_STATUS_BUFFER_TOO_SMALL = 7,
  GM_STATUS_INTERNAL = 8,
} GmStatus;

typedef enum GmMetric {
  GM_METRIC_PROJECTIVE_F = 0,
  GM_METRIC_PROJECTIVE2 = 1,
} GmMetric;

// Point of G(k, n).
typedef struct GmPoint GmPoint;

// Seeded random stream.
typedef struct GmRng GmRng;

// Downlink scenario. `sinr_su_db` is the SU-MIMO SINR in dB.
typedef struct GmScenario {
  size_t n_antennas;
  size_t n_users;
  double alpha;
  double sinr_su_db;
} GmScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// NUL-terminated library version.
const char *gm_version(void);

// Length in bytes of the last error message on this thread, excluding NUL.
size_t gm_last_error_length(void);

// Copies the last error message into `buf` with a trailing NUL and returns
// the number of bytes written excluding the NUL, or -1 if `buf` is null or
// shorter than `gm_last_error_length() + 1`.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
int gm_last_error_message(char *buf, size_t len);

// Normalized hyperball volume on G(k, n), i.e. the CDF of the distance
// between two uniform points.
//
// # Safety
// `out` must be null or writable.
enum GmStatus gm_volume(uint32_t k, uint32_t n, double delta, enum GmMetric metric, double *out);

// B(m, n).
//
// # Safety
// `out` must be null or writable.
enum GmStatus gm_beta(uint32_t m, uint32_t n, double *out);

// ∫₀^α x^{m−1}(1−x)^{n−1} dx.
//
// # Safety
// `out` must be null or writable.
enum GmStatus gm_incomplete_beta(double alpha, uint32_t m, uint32_t n, double *out);

// # Safety
// `out` must be null or writable.
enum GmStatus gm_regularized_incomplete_beta(double alpha, uint32_t m, uint32_t n, double *out);

// B(½, m, n) − B(α, m, n).
//
// # Safety
// `out` must be null or writable.
enum GmStatus gm_incomplete_beta_difference(double alpha, uint32_t m, uint32_t n, double *out);

// New stream; never returns null.
struct GmRng *gm_rng_new(uint64_t master_seed, uint64_t stream_id);

// # Safety
// `rng` must be null or a handle from [`gm_rng_new`] not yet freed.
void gm_rng_free(struct GmRng *rng);

// Haar-uniform point of G(k, n) drawn from `rng`.
//
// # Safety
// `rng` must be a live handle and `out` null or writable.
enum GmStatus gm_point_sample(struct GmRng *rng, size_t n, size_t k, struct GmPoint **out);

// Point spanned by an orthonormal n×k basis given column-major as separate
// real and imaginary arrays of length n·k. `imag` may be null for a real
// basis.
//
// # Safety
// `real` (and `imag` if non-null) must hold `n*k` doubles; `out` null or
// writable.
enum GmStatus gm_point_from_basis(size_t n,
                                  size_t k,
                                  const double *real,
                                  const double *imag,
                                  struct GmPoint **out);

// # Safety
// `p` must be null or a live point handle.
void gm_point_free(struct GmPoint *p);

// Ambient dimension `n`, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live point handle.
size_t gm_point_n(const struct GmPoint *p);

// Subspace dimension `k`, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live point handle.
size_t gm_point_k(const struct GmPoint *p);

// Copies the stored basis, column-major, into `real` and `imag`, each of
// length at least `len`.
//
// # Safety
// `real` and `imag` must each hold `len` writable doubles.
enum GmStatus gm_point_basis(const struct GmPoint *p, double *real, double *imag, size_t len);

// Canonical angles in radians, largest first. Writes their count to `count`.
//
// # Safety
// `angles` must hold `len` writable doubles; `count` null or writable.
enum GmStatus gm_canonical_angles(const struct GmPoint *a,
                                  const struct GmPoint *b,
                                  double *angles,
                                  size_t len,
                                  size_t *count);

// √(Σ sin²θᵢ).
//
// # Safety
// Handles must be live; `out` null or writable.
enum GmStatus gm_distance_pf(const struct GmPoint *a, const struct GmPoint *b, double *out);

// max sinθᵢ.
//
// # Safety
// Handles must be live; `out` null or writable.
enum GmStatus gm_distance_p2(const struct GmPoint *a, const struct GmPoint *b, double *out);

// Closed-form expected CB SINR (linear).
//
// # Safety
// `s` must be null or valid; `out` null or writable.
enum GmStatus gm_estimate_cb_expected(const struct GmScenario *s, double *out);

// ZF SINR estimate from the reported cross-power sum `z` in [0, 1).
//
// # Safety
// `s` must be null or valid; `out` null or writable.
enum GmStatus gm_estimate_zf(double z, const struct GmScenario *s, double *out);

// Lower bound on the expected ZF SINR (linear).
//
// # Safety
// `s` must be null or valid; `out` null or writable.
enum GmStatus gm_zf_expected_lower_bound(const struct GmScenario *s, double *out);

// Estimated ZF-over-CB SINR gain (linear).
//
// # Safety
// `s` must be null or valid; `out` null or writable.
enum GmStatus gm_gain_zf_cb(double z, const struct GmScenario *s, double *out);

// Large-system ZF-over-CB gain (linear).
//
// # Safety
// `s` must be null or valid; `out` null or writable.
enum GmStatus gm_gain_zf_cb_asymptotic(const struct GmScenario *s, double *out);

// Expected ZF SINR with perfect CSI (linear).
//
// # Safety
// `s` must be null or valid; `out` null or writable.
enum GmStatus gm_zf_ideal_expected(const struct GmScenario *s, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRASSMIMO_H */
