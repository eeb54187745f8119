#ifndef TWOPHASE_TWOPHASE_H
#define TWOPHASE_TWOPHASE_H

/* C interface to the two-phase flow simulator.
 *
 * Every function returning tp_status leaves a message for the calling
 * thread in tp_last_error_message() when it fails. Handles are opaque and
 * owned by the caller; destroy functions accept NULL.
 *
 * String outputs follow one convention: *len receives the string length
 * without the terminator; when cap <= *len nothing is written and
 * TP_ERR_BUFFER_TOO_SMALL is returned, so a call with buf = NULL, cap = 0
 * queries the size. */

#include <stddef.h>

#if defined(_WIN32)
#define TP_API __declspec(dllexport)
#else
#define TP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tp_status {
    TP_OK = 0,
    TP_ERR_INVALID_ARGUMENT = 1,
    TP_ERR_POSITIVITY = 2,
    TP_ERR_NUMERICAL_BLOWUP = 3,
    TP_ERR_DEGENERATE_DENSITY = 4,
    TP_ERR_CONSTRAINT_VIOLATION = 5,
    TP_ERR_VACUUM_MISMATCH = 6,
    TP_ERR_ZERO_MASS = 7,
    TP_ERR_CONFIG = 8,
    TP_ERR_IO = 9,
    TP_ERR_BUFFER_TOO_SMALL = 10,
    TP_ERR_INTERNAL = 11
} tp_status;

typedef struct tp_config tp_config;
typedef struct tp_state tp_state;

typedef struct tp_diagnostics {
    double t;
    double E;
    double E_tilde;
    double D;
    double BD;
    double MV;
    double mass_n;
    double mass_rho;
    double momentum[3]; /* entries past dim are 0 */
    double n_min;
    double n_max;
    double rho_min;
    double rho_max;
    double dist_eq;
    double rho_gamma_plus1;
    double rho_hi;
} tp_diagnostics;

TP_API const char* tp_version(void);
TP_API const char* tp_status_name(tp_status status);
/* Message of the last failed call on this thread; "" if none. */
TP_API const char* tp_last_error_message(void);

/* Configuration. overrides holds n_overrides strings "key.path=value". */
TP_API tp_status tp_config_from_file(const char* path, const char* const* overrides, size_t n_overrides,
                                     tp_config** out);
TP_API tp_status tp_config_from_string(const char* text, const char* const* overrides, size_t n_overrides,
                                       tp_config** out);
TP_API void tp_config_destroy(tp_config* cfg);
TP_API tp_status tp_config_resolved_json(const tp_config* cfg, char* buf, size_t cap, size_t* len);
TP_API tp_status tp_config_output_dir(const tp_config* cfg, char* buf, size_t cap, size_t* len);
TP_API int tp_config_has_sweep(const tp_config* cfg);

/* Experiments. *exit_code receives 0 (pass), 1 (runtime or invariant
 * failure) or 2 (configuration error). out_dir may be NULL to skip output. */
TP_API tp_status tp_run_single(const tp_config* cfg, const char* out_dir, int quiet, int* exit_code);
TP_API tp_status tp_run_sweep(const tp_config* cfg, const char* out_dir, int quiet, int* exit_code);
TP_API tp_status tp_check_init(const tp_config* cfg, const char* out_dir, int quiet, int* exit_code);
TP_API tp_status tp_report(const char* const* paths, size_t count, char* buf, size_t cap, size_t* len,
                           int* exit_code);

/* States. */
TP_API tp_status tp_state_from_config(const tp_config* cfg, tp_state** out);
TP_API tp_status tp_state_read_snapshot(const char* path, tp_state** out);
TP_API tp_status tp_state_write_snapshot(const tp_state* s, const char* path);
TP_API void tp_state_destroy(tp_state* s);
TP_API int tp_state_dim(const tp_state* s);
TP_API int tp_state_points_per_axis(const tp_state* s);
TP_API double tp_state_time(const tp_state* s);
/* name is one of n, rho, v.0 .. v.{dim-1}, u.0 .. u.{dim-1}; *len receives
 * the cell count. */
TP_API tp_status tp_state_field(const tp_state* s, const char* name, double* out, size_t cap, size_t* len);
TP_API tp_status tp_state_stable_dt(const tp_state* s, const tp_config* cfg, double* dt);
TP_API tp_status tp_state_step(tp_state* s, const tp_config* cfg, double dt);
TP_API tp_status tp_state_diagnostics(const tp_state* s, const tp_config* cfg, tp_diagnostics* out);

#ifdef __cplusplus
}
#endif

#endif
