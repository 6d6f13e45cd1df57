#ifndef RLCLARITY_H
#define RLCLARITY_H

/* C interface to the rollout-clarity library. Every function returns an
 * rlc_status; outputs go through pointers. Returned const char* pointers
 * borrow storage owned by the handle they came from and stay valid until
 * that handle is freed. On any failure, rlc_last_error() describes the
 * problem for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32) && defined(RLC_BUILD_DLL)
#define RLC_API __declspec(dllexport)
#else
#define RLC_API
#endif

typedef enum rlc_status {
  RLC_OK = 0,
  RLC_E_EMPTY_GROUP = 1,
  RLC_E_MIXED_QUERY_IDS = 2,
  RLC_E_NONFINITE_LOGPROB = 3,
  RLC_E_POSITIVE_LOGPROB = 4,
  RLC_E_INVALID_REWARD = 5,
  RLC_E_EMPTY_SEQUENCE = 6,
  RLC_E_PARTITION_MISMATCH = 7,
  RLC_E_EMPTY_REWARDS = 8,
  RLC_E_MISSING_SEED = 9,
  RLC_E_UNKNOWN_CODE = 10,
  RLC_E_COUNT_MISMATCH = 11,
  RLC_E_JUDGE_FAILURE = 12,
  RLC_E_PARSE = 13,
  RLC_E_EMPTY_INPUT = 14,
  RLC_E_IO = 15,
  RLC_E_INSUFFICIENT_SUPPORT = 16,
  RLC_E_BAD_CONFIG = 17,
  RLC_E_INVALID_ARGUMENT = 18,
  RLC_E_UNKNOWN = 99
} rlc_status;

RLC_API const char* rlc_version(void);

/* Message for the most recent failure on this thread; never NULL. */
RLC_API const char* rlc_last_error(void);

/* ---- datasets ------------------------------------------------------- */

typedef struct rlc_dataset rlc_dataset;
typedef struct rlc_group rlc_group;

RLC_API rlc_status rlc_dataset_open(const char* path, rlc_dataset** out);
RLC_API rlc_status rlc_dataset_parse(const char* jsonl, rlc_dataset** out);
RLC_API void rlc_dataset_free(rlc_dataset* dataset);

RLC_API rlc_status rlc_dataset_group_count(const rlc_dataset* dataset,
                                           size_t* out);
/* Groups are ordered by query_id. The returned handle borrows from the
 * dataset. */
RLC_API rlc_status rlc_dataset_group(const rlc_dataset* dataset, size_t index,
                                     const rlc_group** out);
RLC_API rlc_status rlc_dataset_find(const rlc_dataset* dataset,
                                    const char* query_id,
                                    const rlc_group** out);

RLC_API const char* rlc_group_query_id(const rlc_group* group);
RLC_API rlc_status rlc_group_size(const rlc_group* group, size_t* out);
RLC_API const char* rlc_group_response_id(const rlc_group* group,
                                          size_t record);
RLC_API rlc_status rlc_group_correct(const rlc_group* group, size_t record,
                                     int* out);
RLC_API rlc_status rlc_group_reward(const rlc_group* group, size_t record,
                                    double* out);
RLC_API rlc_status rlc_group_logprobs(const rlc_group* group, size_t record,
                                      const double** out, size_t* out_len);
/* Optional fields; NULL when the record does not carry them. */
RLC_API const char* rlc_group_text(const rlc_group* group, size_t record);
RLC_API const char* rlc_group_method_label(const rlc_group* group,
                                           size_t record);
RLC_API const char* rlc_group_error_code(const rlc_group* group,
                                         size_t record);
RLC_API const char* rlc_group_difficulty(const rlc_group* group,
                                         size_t record);

/* ---- scoring -------------------------------------------------------- */

/* Length-normalized sequence probability exp(mean of token logprobs). */
RLC_API rlc_status rlc_sequence_prob(const double* logprobs, size_t n,
                                     double* out);

/* Per-record scores in record order; buf must hold the group size. */
RLC_API rlc_status rlc_group_scores(const rlc_group* group, double* buf,
                                    size_t buflen);

/* ---- clarity -------------------------------------------------------- */

typedef struct rlc_clarity {
  int s_defined;
  double s;
  int s_rect_defined;
  double s_rect;
  int fisher_defined;
  double fisher;
  int fisher_rect_defined;
  double fisher_rect;
  int p_pos_defined;
  double p_pos_mean;
  int p_neg_defined;
  double p_neg_mean;
  double pass_rate;
} rlc_clarity;

RLC_API rlc_status rlc_clarity_report(const rlc_group* group,
                                      rlc_clarity* out);

/* Per-sample silhouette values in record order. Writes nothing and sets
 * *out_defined = 0 when a verdict cluster is empty. */
RLC_API rlc_status rlc_silhouette_samples(const rlc_group* group, double* buf,
                                          size_t buflen, size_t* out_len,
                                          int* out_defined);

typedef struct rlc_bins {
  size_t n_high;
  int mean_rho_high_defined;
  double mean_rho_high;
  size_t n_low;
  int mean_rho_low_defined;
  double mean_rho_low;
  size_t n_zero;
  int mean_rho_zero_defined;
  double mean_rho_zero;
  size_t n_undefined;
} rlc_bins;

/* Buckets every group in the dataset by the sign of its silhouette. */
RLC_API rlc_status rlc_dataset_bins(const rlc_dataset* dataset, rlc_bins* out);

/* ---- advantages ----------------------------------------------------- */

typedef enum rlc_policy_kind {
  RLC_POLICY_SILHOUETTE = 0,
  RLC_POLICY_FISHER = 1,
  RLC_POLICY_SEPARATION = 2,
  RLC_POLICY_PASSRATE = 3,
  RLC_POLICY_RANDOM = 4,
  RLC_POLICY_NONE = 5
} rlc_policy_kind;

typedef struct rlc_policy {
  int kind; /* rlc_policy_kind */
  double beta;
  int has_clamp;
  double clamp_lo;
  double clamp_hi;
  int has_seed;
  uint64_t seed;
} rlc_policy;

RLC_API rlc_status rlc_policy_default(int kind, rlc_policy* out);
RLC_API rlc_status rlc_policy_kind_from_name(const char* name, int* out);
RLC_API const char* rlc_policy_kind_name(int kind);

/* Group-normalized advantages; *out_degenerate = 1 when all rewards are
 * equal (values are then all zero). */
RLC_API rlc_status rlc_grpo_advantage(const double* rewards, size_t n,
                                      double* out, int* out_degenerate);

RLC_API rlc_status rlc_weight(const rlc_group* group,
                              const rlc_policy* policy, double* out);

RLC_API rlc_status rlc_reweighted_advantage(const rlc_group* group,
                                            const rlc_policy* policy,
                                            double* buf, size_t buflen,
                                            int* out_degenerate);

/* ---- judges and clustering ------------------------------------------ */

typedef struct rlc_judge rlc_judge;
typedef struct rlc_judge_cache rlc_judge_cache;
typedef struct rlc_clusters rlc_clusters;

/* Verdict callback: return 1 (same method), 0 (different), negative on
 * failure. `question` is the current query context, may be empty. */
typedef int (*rlc_judge_fn)(void* ctx, const char* question,
                            const char* solution_a, const char* solution_b);

RLC_API rlc_status rlc_judge_cache_new(rlc_judge_cache** out);
RLC_API void rlc_judge_cache_free(rlc_judge_cache* cache);
RLC_API rlc_status rlc_judge_cache_size(const rlc_judge_cache* cache,
                                        size_t* out);

RLC_API rlc_status rlc_judge_label_new(rlc_judge** out);
/* cache may be NULL. The judge keeps a reference to the cache, so freeing
 * the cache handle early is safe. */
RLC_API rlc_status rlc_judge_remote_new(const char* endpoint,
                                        rlc_judge_cache* cache,
                                        rlc_judge** out);
RLC_API rlc_status rlc_judge_callback_new(rlc_judge_fn fn, void* ctx,
                                          rlc_judge** out);
RLC_API void rlc_judge_free(rlc_judge* judge);

/* Incremental method clustering of `solutions` (question may be NULL). */
RLC_API rlc_status rlc_cluster_solutions(const char* question,
                                         const char* const* solutions,
                                         size_t n, rlc_judge* judge,
                                         rlc_clusters** out);
RLC_API void rlc_clusters_free(rlc_clusters* clusters);
RLC_API rlc_status rlc_clusters_count(const rlc_clusters* clusters,
                                      size_t* out);
RLC_API rlc_status rlc_clusters_judge_calls(const rlc_clusters* clusters,
                                            size_t* out);
RLC_API rlc_status rlc_clusters_representative(const rlc_clusters* clusters,
                                               size_t cluster, size_t* out);
RLC_API rlc_status rlc_clusters_size(const rlc_clusters* clusters,
                                     size_t cluster, size_t* out);
RLC_API rlc_status rlc_clusters_member(const rlc_clusters* clusters,
                                       size_t cluster, size_t member,
                                       size_t* out);

/* K / n_correct; *out_defined = 0 when n_correct is zero. */
RLC_API rlc_status rlc_distinct_ratio(const rlc_clusters* clusters,
                                      size_t n_correct, double* out,
                                      int* out_defined);

/* ---- attribution and stability --------------------------------------- */

typedef enum rlc_severity {
  RLC_SEVERITY_HIGH = 0,
  RLC_SEVERITY_MID = 1,
  RLC_SEVERITY_LOW = 2,
  RLC_SEVERITY_OTHER = 3
} rlc_severity;

RLC_API rlc_status rlc_severity_of(const char* code, int* out);
RLC_API const char* rlc_severity_name(int severity);

typedef struct rlc_attribution {
  size_t total;
  size_t counts[4];
  int proportion_defined[4];
  double proportions[4];
  int s_neg_defined[4];
  double s_neg_fraction[4];
} rlc_attribution;

/* s_defined[i] = 0 marks a record with no silhouette value; pass
 * s_values = NULL to mark every record undefined. */
RLC_API rlc_status rlc_attribution_summary(const char* const* codes,
                                           const double* s_values,
                                           const int* s_defined, size_t n,
                                           rlc_attribution* out);

typedef struct rlc_stability {
  size_t n_high;
  int mean_ratio_high_defined;
  double mean_ratio_high;
  size_t n_low;
  int mean_ratio_low_defined;
  double mean_ratio_low;
} rlc_stability;

/* Mean distinct ratio split on s >= 0 versus s < 0. */
RLC_API rlc_status rlc_stability_by_clarity(const double* ratios,
                                            const double* s, size_t n,
                                            rlc_stability* out);

/* ---- cross-model intersection ---------------------------------------- */

typedef struct rlc_intersection rlc_intersection;

/* Joins two per-query pass-rate tables on query id. A query is solvable
 * when its pass rate is positive; shared queries are solvable in both. */
RLC_API rlc_status rlc_intersection_new(const char* const* ids_a,
                                        const double* rho_a, size_t n_a,
                                        const char* const* ids_b,
                                        const double* rho_b, size_t n_b,
                                        rlc_intersection** out);
/* Same join, reading two (query_id, pass_rate) CSV files. */
RLC_API rlc_status rlc_intersection_open(const char* path_a,
                                         const char* path_b,
                                         rlc_intersection** out);
RLC_API void rlc_intersection_free(rlc_intersection* intersection);
RLC_API rlc_status rlc_intersection_count(const rlc_intersection* intersection,
                                          size_t* out);
RLC_API const char* rlc_intersection_query(
    const rlc_intersection* intersection, size_t index);
RLC_API rlc_status rlc_intersection_pair(const rlc_intersection* intersection,
                                         size_t index, double* out_rho_a,
                                         double* out_rho_b);
RLC_API rlc_status rlc_intersection_fractions(
    const rlc_intersection* intersection, double* out_fraction_a,
    double* out_fraction_b, double* out_below_diagonal);

/* ---- simulator -------------------------------------------------------- */

typedef struct rlc_sim_config rlc_sim_config;
typedef struct rlc_sim_result rlc_sim_result;

RLC_API rlc_status rlc_sim_config_open(const char* path, rlc_sim_config** out);
RLC_API rlc_status rlc_sim_config_parse(const char* text,
                                        rlc_sim_config** out);
RLC_API void rlc_sim_config_free(rlc_sim_config* config);
RLC_API rlc_status rlc_sim_config_set_seed(rlc_sim_config* config,
                                           uint64_t seed);
RLC_API rlc_status rlc_sim_config_set_steps(rlc_sim_config* config,
                                            uint64_t steps);
RLC_API rlc_status rlc_sim_config_set_policy(rlc_sim_config* config,
                                             const rlc_policy* policy);

RLC_API rlc_status rlc_sim_run(const rlc_sim_config* config,
                               rlc_sim_result** out);
RLC_API void rlc_sim_result_free(rlc_sim_result* result);

typedef struct rlc_sim_row {
  uint64_t step;
  int mean_s_defined;
  double mean_s;
  double mean_pass_rate;
  double mean_w;
  double mean_grad_norm;
  double grad_var;
} rlc_sim_row;

RLC_API rlc_status rlc_sim_result_steps(const rlc_sim_result* result,
                                        size_t* out);
RLC_API rlc_status rlc_sim_result_row(const rlc_sim_result* result,
                                      size_t index, rlc_sim_row* out);
RLC_API rlc_status rlc_sim_result_final_pass(const rlc_sim_result* result,
                                             double* out);
/* Writes the trajectory as CSV (step, mean_S, mean_pass_rate, mean_w,
 * grad_var) to `path`. */
RLC_API rlc_status rlc_sim_result_write_csv(const rlc_sim_result* result,
                                            const char* path);

#ifdef __cplusplus
}
#endif

#endif /* RLCLARITY_H */
