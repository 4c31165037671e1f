#ifndef CRNP_H
#define CRNP_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes. Values are stable.
 */
typedef enum CrnpStatus {
  CRNP_STATUS_OK = 0,
  CRNP_STATUS_NULL_ARGUMENT = 1,
  CRNP_STATUS_INVALID_UTF8 = 2,
  CRNP_STATUS_INVALID_INPUT = 3,
  CRNP_STATUS_TOO_LARGE = 4,
  CRNP_STATUS_NUMERIC = 5,
  CRNP_STATUS_BUFFER_TOO_SMALL = 6,
  CRNP_STATUS_INTERNAL = 7,
} CrnpStatus;

typedef enum CrnpVerdict {
  CRNP_VERDICT_PERSISTENT = 0,
  CRNP_VERDICT_UNDECIDED = 1,
} CrnpVerdict;

/*
 Persistence certificate together with its JSON rendering.
 */
typedef struct CrnpCertificate CrnpCertificate;

/*
 Parsed, validated network.
 */
typedef struct CrnpNetwork CrnpNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *crnp_version(void);

/*
 Message for the most recent failure on this thread. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *crnp_last_error(void);

/*
 Parses and validates network text.

 # Safety
 `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CrnpStatus crnp_network_parse(const char *text, struct CrnpNetwork **out);

/*
 # Safety
 `net` must be null or a handle from [`crnp_network_parse`].
 */
size_t crnp_network_species_count(const struct CrnpNetwork *net);

/*
 # Safety
 `net` must be null or a handle from [`crnp_network_parse`] not yet freed.
 */
void crnp_network_free(struct CrnpNetwork *net);

/*
 Builds the persistence certificate. `max_n == 0` selects the default
 enumeration cap.

 # Safety
 `net` must be a live network handle and `out` a writable pointer.
 */
enum CrnpStatus crnp_certify(const struct CrnpNetwork *net,
                             size_t max_n,
                             struct CrnpCertificate **out);

/*
 # Safety
 `cert` must be a live certificate handle.
 */
enum CrnpVerdict crnp_certificate_verdict(const struct CrnpCertificate *cert);

/*
 Whether the verdict rests on an unverified complex balance assumption.

 # Safety
 `cert` must be a live certificate handle.
 */
bool crnp_certificate_is_conditional(const struct CrnpCertificate *cert);

/*
 JSON document owned by the certificate; valid until it is freed.

 # Safety
 `cert` must be a live certificate handle.
 */
const char *crnp_certificate_json(const struct CrnpCertificate *cert);

/*
 # Safety
 `cert` must be null or a handle from [`crnp_certify`] not yet freed.
 */
void crnp_certificate_free(struct CrnpCertificate *cert);

/*
 Integrates from the constant history `history[0..n]` and writes the
 state at `t_end` to `out[0..n]`, where `n` is the species count.

 # Safety
 `history` and `out` must each point to `len` doubles.
 */
enum CrnpStatus crnp_simulate_terminal(const struct CrnpNetwork *net,
                                       const double *history,
                                       size_t len,
                                       double t_end,
                                       double step,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRNP_H */
