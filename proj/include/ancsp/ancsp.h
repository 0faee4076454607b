/* C interface to the secondary-path identifiability library.
 *
 * Every function returns an ancsp_status. On failure, ancsp_last_error()
 * returns a message for the calling thread. Strings are copied into
 * caller buffers: a call with cap too small (or buf NULL) stores the
 * required size including the terminator in *needed and returns
 * ANCSP_ERR_INVALID_ARGUMENT without writing.
 */
#ifndef ANCSP_H
#define ANCSP_H

#include <stddef.h>
#include <stdint.h>

#if defined(ANCSP_BUILDING_LIBRARY)
#define ANCSP_API __attribute__((visibility("default")))
#else
#define ANCSP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ancsp_status {
    ANCSP_OK = 0,
    ANCSP_ERR_INVALID_ARGUMENT = 1,
    ANCSP_ERR_CONFIG = 2,
    ANCSP_ERR_DIVERGENCE = 3,
    ANCSP_ERR_IO = 4,
    ANCSP_ERR_DEGENERATE_INPUT = 5,
    ANCSP_ERR_NUMERICAL = 6,
    ANCSP_ERR_INTERNAL = 7
} ancsp_status;

typedef struct ancsp_config ancsp_config;
typedef struct ancsp_result ancsp_result;
typedef struct ancsp_sweep ancsp_sweep;
typedef struct ancsp_identifier ancsp_identifier;

ANCSP_API const char* ancsp_last_error(void);
ANCSP_API const char* ancsp_status_name(ancsp_status status);
ANCSP_API const char* ancsp_version(void);

/* Scenario listing, one "name  description" line each. */
ANCSP_API ancsp_status ancsp_list_scenarios(char* buf, size_t cap, size_t* needed);

/* Scenario configuration. */
ANCSP_API ancsp_status ancsp_config_create(const char* scenario, ancsp_config** out);
/* Parses key = value text; a scenario named in the text must match `scenario`
 * when that is non-NULL and non-empty. */
ANCSP_API ancsp_status ancsp_config_parse(const char* text, const char* scenario, ancsp_config** out);
ANCSP_API ancsp_status ancsp_config_load_file(const char* path, const char* scenario, ancsp_config** out);
ANCSP_API ancsp_status ancsp_config_set(ancsp_config* cfg, const char* key, const char* value);
ANCSP_API ancsp_status ancsp_config_serialize(const ancsp_config* cfg, char* buf, size_t cap, size_t* needed);
ANCSP_API ancsp_status ancsp_config_help(char* buf, size_t cap, size_t* needed);
ANCSP_API void ancsp_config_destroy(ancsp_config* cfg);

/* Scenario runs. */
ANCSP_API ancsp_status ancsp_run(const ancsp_config* cfg, ancsp_result** out);
ANCSP_API size_t ancsp_result_iterations(const ancsp_result* r);
ANCSP_API double ancsp_result_final_mis_s_db(const ancsp_result* r);
ANCSP_API double ancsp_result_final_mis_p_db(const ancsp_result* r);
/* Returns 0 when no attenuation was measured. */
ANCSP_API int ancsp_result_attenuation_db(const ancsp_result* r, double* out);
/* which: 0 e, 1 e1, 2 mis_s_db, 3 mis_p_db. Copies min(cap, iterations). */
ANCSP_API ancsp_status ancsp_result_trace(const ancsp_result* r, int which, double* buf, size_t cap, size_t* count);
/* which: 0 p_hat, 1 s_hat, 2 w, 3 true primary, 4 true secondary. */
ANCSP_API ancsp_status ancsp_result_filter(const ancsp_result* r, int which, double* buf, size_t cap, size_t* count);
/* Rank report of a fixed-control run; returns 0 when there is none. */
ANCSP_API int ancsp_result_rank(const ancsp_result* r, size_t* rank, size_t* dimension, int* predicted_full);
ANCSP_API ancsp_status ancsp_result_summary_line(const ancsp_result* r, char* buf, size_t cap, size_t* needed);
ANCSP_API ancsp_status ancsp_result_summary_table(const ancsp_result* r, char* buf, size_t cap, size_t* needed);
ANCSP_API const char* ancsp_summary_header(void);
typedef void (*ancsp_path_callback)(const char* path, void* user);
/* Writes every output file into dir; the callback (may be NULL) sees each path. */
ANCSP_API ancsp_status ancsp_result_write(const ancsp_result* r, const char* dir, ancsp_path_callback cb, void* user);
ANCSP_API void ancsp_result_destroy(ancsp_result* r);

/* Identifiability analysis. */
typedef struct ancsp_case_prediction {
    int case_number;          /* 1, 2 or 3 */
    int full_rank;            /* 1 when R_x is predicted to be full rank */
    int tail_condition_failed;
    char label[32];           /* e.g. "Case3-condition-failed" */
} ancsp_case_prediction;

/* taps may be NULL (n_taps 0): a generic filter is assumed. */
ANCSP_API ancsp_status ancsp_predict_case(size_t N, size_t L, size_t M, const double* taps, size_t n_taps,
                                          ancsp_case_prediction* out);
/* Reads an `index,tap` CSV. */
ANCSP_API ancsp_status ancsp_read_taps_csv(const char* path, double* buf, size_t cap, size_t* count);
ANCSP_API ancsp_status ancsp_tv_identifiability(const double* w_a, size_t n_a, const double* w_b, size_t n_b,
                                                size_t M, int* identifiable, size_t* rank);

typedef struct ancsp_sweep_params {
    size_t l_min, l_max, m_min, m_max, n_min, n_max; /* n_max 0: L + 3 */
    size_t trials;
    uint64_t seed;
    size_t t_factor;
    int zero_tail;
    int schur;
    int gaussian_taps; /* N(0,1) control taps instead of +-[0.5, 1.5] */
} ancsp_sweep_params;

ANCSP_API void ancsp_sweep_params_default(ancsp_sweep_params* p);
ANCSP_API ancsp_status ancsp_sweep_run(const ancsp_sweep_params* p, ancsp_sweep** out);
ANCSP_API double ancsp_sweep_agreement(const ancsp_sweep* s);
ANCSP_API size_t ancsp_sweep_rows(const ancsp_sweep* s);
ANCSP_API ancsp_status ancsp_sweep_csv(const ancsp_sweep* s, char* buf, size_t cap, size_t* needed);
ANCSP_API void ancsp_sweep_destroy(ancsp_sweep* s);

/* Streaming joint identifier. */
ANCSP_API ancsp_status ancsp_identifier_create_nlms(size_t L, size_t M, double mu, double eps, ancsp_identifier** out);
ANCSP_API ancsp_status ancsp_identifier_create_rls(size_t L, size_t M, double lambda, double delta,
                                                   ancsp_identifier** out);
ANCSP_API ancsp_status ancsp_identifier_step(ancsp_identifier* id, double x1, double x2, double d, double* e1);
/* Copies [p_hat; s_hat] (L + M values). */
ANCSP_API ancsp_status ancsp_identifier_coefficients(const ancsp_identifier* id, double* buf, size_t cap,
                                                     size_t* count);
ANCSP_API void ancsp_identifier_destroy(ancsp_identifier* id);

#ifdef __cplusplus
}
#endif

#endif
