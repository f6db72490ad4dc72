#ifndef MENUGAP_H
#define MENUGAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum MgStatus {
  MG_STATUS_OK = 0,
  MG_STATUS_NULL_POINTER = 1,
  MG_STATUS_INVALID_INPUT = 2,
  MG_STATUS_INVALID_UTF8 = 3,
  MG_STATUS_NUMERICAL = 4,
  MG_STATUS_PANIC = 5,
} MgStatus;

// Finite value distribution.
typedef struct MgDistribution MgDistribution;

// Menu of (allocation, price) entries including the zero option.
typedef struct MgMechanism MgMechanism;

// Point sequence in the nonnegative orthant.
typedef struct MgSequence MgSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next `mg_*` call on the same thread.
const char *mg_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer obtained from this library, freed once.
void mg_string_free(char *s);

// Builds the layered construction with layers 2..=`layers`.
//
// # Safety
// `out` must be a valid pointer.
enum MgStatus mg_sequence_build(size_t layers, struct MgSequence **out);

// Parses `{"k": .., "points": [[..], ..]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum MgStatus mg_sequence_from_json(const char *json, struct MgSequence **out);

// Number of points, or 0 for NULL.
//
// # Safety
// `seq` must be NULL or a live handle.
size_t mg_sequence_len(const struct MgSequence *seq);

// # Safety
// `seq` must be NULL or a live handle, freed once.
void mg_sequence_free(struct MgSequence *seq);

// Optimal menu gap over allocation sequences, solved as a linear program.
//
// # Safety
// `seq` must be a live handle and `out` a valid pointer.
enum MgStatus mg_menugap_lp(const struct MgSequence *seq, double *out);

// Menu gap of the sequence against its own normalized points.
//
// # Safety
// `seq` must be a live handle and `out` a valid pointer.
enum MgStatus mg_supgap(const struct MgSequence *seq, double *out);

// Lagrangian upper bound on the aligned gap of a unit-norm sequence.
//
// # Safety
// `seq` must be a live handle and `out` a valid pointer.
enum MgStatus mg_lagrel_bound(const struct MgSequence *seq, double *out);

// Parses `{"k": .., "support": [{"v": [..], "p": ..}, ..]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum MgStatus mg_distribution_from_json(const char *json, struct MgDistribution **out);

// Number of support points, or 0 for NULL.
//
// # Safety
// `d` must be NULL or a live handle.
size_t mg_distribution_len(const struct MgDistribution *d);

// # Safety
// `d` must be NULL or a live handle, freed once.
void mg_distribution_free(struct MgDistribution *d);

// Parses `{"k": .., "menu": [{"q": [..], "price": ..}, ..]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum MgStatus mg_mechanism_from_json(const char *json, struct MgMechanism **out);

// Number of menu entries including the zero option, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t mg_mechanism_len(const struct MgMechanism *m);

// Serializes a mechanism to JSON; release with [`mg_string_free`].
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum MgStatus mg_mechanism_to_json(const struct MgMechanism *m, char **out);

// # Safety
// `m` must be NULL or a live handle, freed once.
void mg_mechanism_free(struct MgMechanism *m);

// Revenue-optimal mechanism; writes the handle and its revenue.
//
// # Safety
// `d` must be a live handle; `out` and `out_revenue` valid pointers.
enum MgStatus mg_optimal_mechanism(const struct MgDistribution *d,
                                   struct MgMechanism **out,
                                   double *out_revenue);

// Expected revenue and aligned revenue of `m` on `d`.
//
// # Safety
// `d`, `m` must be live handles; output pointers valid.
enum MgStatus mg_revenue(const struct MgDistribution *d,
                         const struct MgMechanism *m,
                         double tolerance,
                         double *out_rev,
                         double *out_arev);

// Best grand-bundle price and its revenue.
//
// # Safety
// `d` must be a live handle; output pointers valid.
enum MgStatus mg_brev(const struct MgDistribution *d, double *out_price, double *out_value);

// Writes whether every buyer's choice is individually rational and incentive compatible.
//
// # Safety
// `d`, `m` must be live handles; `out_ok` valid.
enum MgStatus mg_verify_ic(const struct MgDistribution *d,
                           const struct MgMechanism *m,
                           double tolerance,
                           bool *out_ok);

// Runs the revenue-certificate pipeline and returns the certificate as JSON.
// Release the string with [`mg_string_free`].
//
// # Safety
// `d` must be a live handle; `out_json` valid.
enum MgStatus mg_certify(const struct MgDistribution *d, double tolerance, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MENUGAP_H */
