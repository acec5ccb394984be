#ifndef TFCORR_H
#define TFCORR_H

#include <stddef.h>
#include <stdint.h>

// Status codes. The numeric values of the library errors match the CLI exit codes.
typedef enum TfcStatus {
  TFC_STATUS_OK = 0,
  // Invalid argument or input data.
  TFC_STATUS_INVALID = 2,
  // Solver or quadrature did not converge.
  TFC_STATUS_NUMERICAL = 3,
  TFC_STATUS_IO = 4,
  TFC_STATUS_NULL_POINTER = 5,
  // Caller buffer too small.
  TFC_STATUS_BUFFER = 6,
  // Internal panic; the message holds the payload.
  TFC_STATUS_PANIC = 7,
} TfcStatus;

// Solved Thomas-Fermi atom or ion.
typedef struct TfcAtom TfcAtom;

// Solved Thomas-Fermi dot.
typedef struct TfcDot TfcDot;

typedef struct TfcAtomSummary {
  double q;
  double mu_global;
  // NaN for the neutral atom.
  double support_radius;
  // Coefficient of `r⁻⁴` in the tail; NaN for ions.
  double tail_coeff;
  double origin_coeff;
  double residual;
  double normalization;
  size_t grid_len;
} TfcAtomSummary;

typedef struct TfcAtomCorrelation {
  double a_value;
  // NaN when the `B` integral does not converge.
  double b_value;
  double ec2_integral;
  // Per-electron hartree terms.
  double log_term;
  double const_base;
  double x_a;
  double x_b;
  double x_unknown;
  double ec2_const;
  double ec2_term;
  // `−Ē_c` in hartree.
  double total_hartree;
} TfcAtomCorrelation;

typedef struct TfcDotSummary {
  double mu_global;
  double support_radius;
  double w_prime_at_r;
  double residual;
  double normalization;
  double e_tf;
} TfcDotSummary;

typedef struct TfcDotEnergy {
  double n;
  double e_tf;
  double exchange_term;
  double laplacian_term;
  double delta_term;
  double screening_residual;
  double corr_const;
  double corr_integral;
  double total;
} TfcDotEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length plus one, or 0 when
// there is no error.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t tfc_last_error_message(char *buf, size_t len);

// Library version, a static NUL-terminated string.
const char *tfc_version(void);

// Solves the atom (`q = 1`) or a positive ion (`0 < q < 1`) on a logarithmic
// grid of `grid_nodes` points in `[r_min, r_max]`.
//
// # Safety
// `out` must be a valid pointer; on success it receives a new handle.
enum TfcStatus tfc_atom_solve(double q,
                              size_t grid_nodes,
                              double r_min,
                              double r_max,
                              double tol,
                              struct TfcAtom **out_atom);

// # Safety
// `atom` must be null or a handle from `tfc_atom_solve` not yet freed.
void tfc_atom_free(struct TfcAtom *atom);

// # Safety
// `atom` must be a live handle and `summary` a valid pointer.
enum TfcStatus tfc_atom_summary(const struct TfcAtom *atom, struct TfcAtomSummary *summary);

// `μ₊(r)` of a solved atom.
//
// # Safety
// `atom` must be a live handle and `value` a valid pointer.
enum TfcStatus tfc_atom_mu_plus(const struct TfcAtom *atom, double r, double *value);

// Copies the grid and `μ₊` samples. Both arrays need `grid_len` entries.
//
// # Safety
// `r` and `mu` must point to `len` writable doubles.
enum TfcStatus tfc_atom_profile(const struct TfcAtom *atom, double *r, double *mu, size_t len);

// Thomas-Fermi energy of the neutral atom per `Z^{7/3}`, in hartree.
//
// # Safety
// `atom` must be a live handle and `value` a valid pointer.
enum TfcStatus tfc_atom_energy_hartree(const struct TfcAtom *atom, double *value);

// Correlation energy breakdown of a neutral atom with `n` electrons.
//
// # Safety
// `atom` must be a live handle and `result` a valid pointer.
enum TfcStatus tfc_atom_correlation(const struct TfcAtom *atom,
                                    double n,
                                    double x_unknown,
                                    struct TfcAtomCorrelation *result);

// Solves a dot in the confinement `potential` (`r^2`, `r^4`, `r^p:<p>`,
// `<c>*r^p:<p>` or `file:<csv>`).
//
// # Safety
// `potential` must be a NUL-terminated string and `out_dot` a valid pointer.
enum TfcStatus tfc_dot_solve(const char *potential, double tol, struct TfcDot **out_dot);

// # Safety
// `dot` must be null or a handle from `tfc_dot_solve` not yet freed.
void tfc_dot_free(struct TfcDot *dot);

// # Safety
// `dot` must be a live handle and `summary` a valid pointer.
enum TfcStatus tfc_dot_summary(const struct TfcDot *dot, struct TfcDotSummary *summary);

// # Safety
// `dot` must be a live handle and `value` a valid pointer.
enum TfcStatus tfc_dot_mu_plus(const struct TfcDot *dot, double r, double *value);

// Smooth energy breakdown for `n` electrons in a solved dot.
//
// # Safety
// `dot` must be a live handle and `result` a valid pointer.
enum TfcStatus tfc_dot_energy(const struct TfcDot *dot,
                              double n,
                              double tol,
                              struct TfcDotEnergy *result);

// All constant reports as a JSON array. The string is owned by the library
// and released with `tfc_string_free`.
//
// # Safety
// `json` must be a valid pointer.
enum TfcStatus tfc_constants_json(uint64_t seed, size_t mc_samples, char **json);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void tfc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TFCORR_H */
