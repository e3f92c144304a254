/* C ABI for the carematch matching engine. Generated by cbindgen. */

#ifndef CAREMATCH_H
#define CAREMATCH_H

/* This file is auto-generated; edit cbindgen.toml or src/lib.rs instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Patient response model selector for [`CmConfig`].
 */
typedef enum CmPolicy {
  CM_POLICY_ALWAYS_ACCEPT = 0,
  CM_POLICY_BERNOULLI = 1,
} CmPolicy;

/**
 * Status code returned by every fallible entry point.
 */
typedef enum CmStatus {
  CM_STATUS_OK = 0,
  CM_STATUS_NULL_ARGUMENT = 1,
  CM_STATUS_INVALID_UTF8 = 2,
  CM_STATUS_IO_ERROR = 3,
  CM_STATUS_PARSE_ERROR = 4,
  CM_STATUS_VALIDATION_ERROR = 5,
  CM_STATUS_NO_ELIGIBLE_PATIENTS = 6,
  CM_STATUS_STABILITY_VIOLATION = 7,
  CM_STATUS_INTERNAL_ERROR = 8,
} CmStatus;

/**
 * Opaque state adjacency graph.
 */
typedef struct CmAdjacency CmAdjacency;

/**
 * Opaque validated center list.
 */
typedef struct CmCenters CmCenters;

/**
 * Opaque scenario result.
 */
typedef struct CmOutcome CmOutcome;

/**
 * Opaque validated patient cohort.
 */
typedef struct CmPatients CmPatients;

/**
 * Scenario parameters in fixed-point integer encodings.
 */
typedef struct CmConfig {
  /**
   * Percent of annual income available for treatment, in (0, 100].
   */
  uint32_t x_percent;
  /**
   * Accessible-distance cutoff in halves (strict comparison); 3.0 = 6.
   */
  uint32_t t_ad_halves;
  /**
   * Risk threshold in hundredths (inclusive); 0.50 = 50.
   */
  uint32_t t_rs_hundredths;
  /**
   * Bed availability in parts per million; 0.20 = 200000.
   */
  uint32_t availability_ppm;
  enum CmPolicy policy;
  /**
   * Acceptance probability for `CmBernoulli`; ignored otherwise.
   */
  double bernoulli_prob;
  uint64_t seed;
  uint32_t max_rounds;
  /**
   * Run the blocking-pair audit after every round.
   */
  bool verify;
} CmConfig;

/**
 * One offer as reported back to C.
 */
typedef struct CmOffer {
  uint32_t round;
  uint64_t patient_id;
  uint32_t center_id;
  bool accepted;
} CmOffer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty string when no
 * failure has occurred. Valid until the next failing call on this thread.
 */
const char *cm_last_error(void);

/**
 * Loads a state adjacency file (`STATE_A,STATE_B` lines, `#` comments,
 * single codes for isolated states).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CmStatus cm_adjacency_load(const char *path, struct CmAdjacency **out);

/**
 * Returns the shipped US adjacency table.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CmStatus cm_adjacency_shipped(struct CmAdjacency **out);

/**
 * # Safety
 * `ptr` must come from a `cm_adjacency_*` constructor or be null.
 */
void cm_adjacency_free(struct CmAdjacency *ptr);

/**
 * Loads and validates a centers CSV against the adjacency's state set.
 *
 * # Safety
 * All pointers must be valid; `path` NUL-terminated.
 */
enum CmStatus cm_centers_load(const char *path,
                              const struct CmAdjacency *adj,
                              struct CmCenters **out);

/**
 * Returns the shipped 64-center dataset.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CmStatus cm_centers_shipped(struct CmCenters **out);

/**
 * # Safety
 * `centers` must come from a `cm_centers_*` constructor.
 */
size_t cm_centers_count(const struct CmCenters *centers);

/**
 * Total staffed beds across the list.
 *
 * # Safety
 * `centers` must come from a `cm_centers_*` constructor.
 */
uint64_t cm_centers_total_beds(const struct CmCenters *centers);

/**
 * # Safety
 * `ptr` must come from a `cm_centers_*` constructor or be null.
 */
void cm_centers_free(struct CmCenters *ptr);

/**
 * Loads and validates a patients CSV against the adjacency's state set.
 *
 * # Safety
 * All pointers must be valid; `path` NUL-terminated.
 */
enum CmStatus cm_patients_load(const char *path,
                               const struct CmAdjacency *adj,
                               struct CmPatients **out);

/**
 * Deterministic synthetic cohort from the default model; same (n, seed)
 * always produces the same patients.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CmStatus cm_patients_synthesize(uint32_t n, uint64_t seed, struct CmPatients **out);

/**
 * # Safety
 * `patients` must come from a `cm_patients_*` constructor.
 */
size_t cm_patients_count(const struct CmPatients *patients);

/**
 * # Safety
 * `ptr` must come from a `cm_patients_*` constructor or be null.
 */
void cm_patients_free(struct CmPatients *ptr);

/**
 * Runs the multi-round assignment to completion.
 *
 * # Safety
 * All pointers must be valid and come from the matching constructors.
 */
enum CmStatus cm_run(const struct CmPatients *patients,
                     const struct CmCenters *centers,
                     const struct CmAdjacency *adj,
                     const struct CmConfig *cfg,
                     struct CmOutcome **out);

/**
 * Number of rounds executed.
 *
 * # Safety
 * `outcome` must come from `cm_run`.
 */
uint32_t cm_outcome_rounds(const struct CmOutcome *outcome);

/**
 * Beds opened for assignment at the start of the run.
 *
 * # Safety
 * `outcome` must come from `cm_run`.
 */
uint64_t cm_outcome_beds_available(const struct CmOutcome *outcome);

/**
 * Beds consumed by accepted offers.
 *
 * # Safety
 * `outcome` must come from `cm_run`.
 */
uint64_t cm_outcome_beds_filled(const struct CmOutcome *outcome);

/**
 * Eligible patients never matched.
 *
 * # Safety
 * `outcome` must come from `cm_run`.
 */
uint64_t cm_outcome_unmatched(const struct CmOutcome *outcome);

/**
 * Number of offers across all rounds.
 *
 * # Safety
 * `outcome` must come from `cm_run`.
 */
size_t cm_outcome_offer_count(const struct CmOutcome *outcome);

/**
 * Copies offer `index` into `offer`.
 *
 * # Safety
 * `outcome` must come from `cm_run`; `offer` must be valid for writes.
 */
enum CmStatus cm_outcome_offer(const struct CmOutcome *outcome,
                               size_t index,
                               struct CmOffer *offer);

/**
 * # Safety
 * `ptr` must come from `cm_run` or be null.
 */
void cm_outcome_free(struct CmOutcome *ptr);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CAREMATCH_H */
