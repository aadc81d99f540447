#ifndef SEQPREDICT_H
#define SEQPREDICT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_SEQUENCE_TOO_SHORT = 3,
  SP_STATUS_INSUFFICIENT_REPLICATES = 4,
  SP_STATUS_DEGENERATE_VARIANCE = 5,
  SP_STATUS_TOO_FEW_REMAINING = 6,
  SP_STATUS_INVALID_RATE = 7,
  SP_STATUS_NO_CONVERGENCE = 8,
  SP_STATUS_INTERNAL = 99,
} SpStatus;

/**
 * Sample size used in the bias terms.
 */
typedef enum SpConvention {
  /**
   * Positions for the marginal term, transitions for the conditional one.
   */
  SP_CONVENTION_SPLIT = 0,
  SP_CONVENTION_POSITIONS = 1,
  SP_CONVENTION_TRANSITIONS = 2,
} SpConvention;

typedef enum SpMode {
  /**
   * Marginal entropy over all positions.
   */
  SP_MODE_FULL = 0,
  /**
   * Marginal entropy over successor positions only.
   */
  SP_MODE_ALIGNED = 1,
} SpMode;

/**
 * Opaque shuffle-test result.
 */
typedef struct SpBootstrap SpBootstrap;

/**
 * Opaque mark-off sweep.
 */
typedef struct SpMarkoff SpMarkoff;

/**
 * Opaque activity sequence.
 */
typedef struct SpSequence SpSequence;

/**
 * Entropies in bits. The `*_corrected` fields are meaningful only when
 * `has_corrected` is set.
 */
typedef struct SpEntropyReport {
  double h0;
  double h1;
  double h2;
  double mi;
  double h1_aligned;
  double mi_aligned;
  size_t n;
  size_t n_transitions;
  size_t alphabet_size;
  bool has_corrected;
  double h1_corrected;
  double h2_corrected;
  double mi_corrected;
  double mi_aligned_corrected;
} SpEntropyReport;

typedef struct SpBootstrapOptions {
  size_t replicates;
  uint64_t seed;
  bool corrected;
  enum SpMode mode;
  enum SpConvention convention;
} SpBootstrapOptions;

typedef struct SpBootstrapSummary {
  double mi_true;
  double p025;
  double p975;
  double gap;
  bool reject_null;
  size_t replicates;
} SpBootstrapSummary;

typedef struct SpMarkoffPoint {
  double rate;
  size_t retained;
  struct SpBootstrapSummary summary;
} SpMarkoffPoint;

typedef struct SpTTest {
  double t_stat;
  double df;
  double p_value;
  double mean_a;
  double mean_b;
} SpTTest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *sp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sp_version(void);

/**
 * Builds a sequence from arbitrary integer labels; labels are renumbered
 * densely in order of first appearance.
 *
 * # Safety
 * `labels` must point to `len` readable values and `out` must be writable.
 */
enum SpStatus sp_sequence_new(const uint64_t *labels, size_t len, struct SpSequence **out);

/**
 * # Safety
 * `seq` must come from [`sp_sequence_new`] and not be freed twice.
 */
void sp_sequence_free(struct SpSequence *seq);

/**
 * # Safety
 * `seq` must be a live sequence or null.
 */
size_t sp_sequence_len(const struct SpSequence *seq);

/**
 * # Safety
 * `seq` must be a live sequence or null.
 */
size_t sp_sequence_alphabet_size(const struct SpSequence *seq);

/**
 * Plug-in entropies, without bias correction.
 *
 * # Safety
 * `seq` must be a live sequence and `out` writable.
 */
enum SpStatus sp_entropy_report(const struct SpSequence *seq, struct SpEntropyReport *out);

/**
 * Plug-in entropies plus their bias-corrected values.
 *
 * # Safety
 * `seq` must be a live sequence and `out` writable.
 */
enum SpStatus sp_corrected_report(const struct SpSequence *seq,
                                  enum SpConvention convention,
                                  struct SpEntropyReport *out);

/**
 * Bias of the marginal entropy for `m_bar` observed states and sample size `n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SpStatus sp_bias_h1(size_t m_bar, size_t n, double *out);

/**
 * Bias of the conditional entropy; `m_bar_j` holds the successor support of
 * each observed context.
 *
 * # Safety
 * `m_bar_j` must point to `len` values and `out` must be writable.
 */
enum SpStatus sp_bias_h2(const size_t *m_bar_j, size_t len, size_t n, double *out);

/**
 * Bias of the mutual information.
 *
 * # Safety
 * `m_bar_j` must point to `len` values and `out` must be writable.
 */
enum SpStatus sp_bias_mi(size_t m_bar, const size_t *m_bar_j, size_t len, size_t n, double *out);

/**
 * Default options: 1000 replicates, bias-corrected, full mode.
 */
struct SpBootstrapOptions sp_bootstrap_options_default(uint64_t seed);

/**
 * Shuffle test of the mutual information.
 *
 * # Safety
 * `seq` and `opts` must be valid and `out` writable.
 */
enum SpStatus sp_bootstrap(const struct SpSequence *seq,
                           const struct SpBootstrapOptions *opts,
                           struct SpBootstrap **out);

/**
 * # Safety
 * `res` must be a live result and `out` writable.
 */
enum SpStatus sp_bootstrap_summary(const struct SpBootstrap *res, struct SpBootstrapSummary *out);

/**
 * Copies up to `cap` replicate MI values, in replicate order, into `buf`
 * and returns the total number of replicates.
 *
 * # Safety
 * `res` must be a live result; `buf` must have room for `cap` values.
 */
size_t sp_bootstrap_replicates(const struct SpBootstrap *res, double *buf, size_t cap);

/**
 * # Safety
 * `res` must come from [`sp_bootstrap`] and not be freed twice.
 */
void sp_bootstrap_free(struct SpBootstrap *res);

/**
 * Random-deletion sweep over strictly increasing `rates`.
 *
 * # Safety
 * `rates` must point to `len` values; `seq`, `opts` valid; `out` writable.
 */
enum SpStatus sp_markoff_sweep(const struct SpSequence *seq,
                               const double *rates,
                               size_t len,
                               const struct SpBootstrapOptions *opts,
                               struct SpMarkoff **out);

/**
 * # Safety
 * `profile` must be live or null.
 */
size_t sp_markoff_len(const struct SpMarkoff *profile);

/**
 * # Safety
 * `profile` must be live and `out` writable.
 */
enum SpStatus sp_markoff_point(const struct SpMarkoff *profile,
                               size_t index,
                               struct SpMarkoffPoint *out);

/**
 * Writes the first rate at which the test stops rejecting. Returns false,
 * leaving `out` untouched, when every rate rejects.
 *
 * # Safety
 * `profile` must be live and `out` writable.
 */
bool sp_markoff_critical_rate(const struct SpMarkoff *profile, double *out);

/**
 * # Safety
 * `profile` must come from [`sp_markoff_sweep`] and not be freed twice.
 */
void sp_markoff_free(struct SpMarkoff *profile);

/**
 * Two-sided two-sample t-test; `welch` selects unequal variances.
 *
 * # Safety
 * `a` and `b` must point to `len_a` and `len_b` values; `out` writable.
 */
enum SpStatus sp_t_test(const double *a,
                        size_t len_a,
                        const double *b,
                        size_t len_b,
                        bool welch,
                        struct SpTTest *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEQPREDICT_H */
