/* C interface to the coupled kicked-rotor simulation engine.
 *
 * All functions are thread-safe except where noted; error messages are
 * thread-local and remain valid until the next call on the same thread.
 */
#ifndef KICKED_DUO_H
#define KICKED_DUO_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kd_status {
    KD_OK = 0,
    KD_ERR_ARG = 1,           /* NULL or malformed argument */
    KD_ERR_CONFIG = 2,        /* bad config key/value, preset, or parameters */
    KD_ERR_NUMERIC_GUARD = 3, /* momentum support hit the aliasing guard */
    KD_ERR_IO = 4,            /* file missing, unreadable, or corrupt */
    KD_ERR_STATE = 5,         /* checkpoint/representation mismatch */
    KD_ERR_INTERNAL = 6
} kd_status;

/* Opaque experiment description. Build one with the setters below, then
 * execute it with kd_run. Not safe for concurrent mutation. */
typedef struct kd_spec kd_spec;

kd_spec* kd_spec_create(void);
void kd_spec_free(kd_spec* spec);

/* Merges key=value pairs from a config file ('#' comments, blank lines ok).
 * Later sources override earlier ones. */
kd_status kd_spec_load_config(kd_spec* spec, const char* path);

/* Sets a single config key (same key set as the config file). The pair is
 * validated immediately; unknown keys are rejected by name. */
kd_status kd_spec_set(kd_spec* spec, const char* key, const char* value);

/* Copies the stored raw value for a key set earlier into buf (NUL-terminated,
 * truncated to buflen). Returns KD_ERR_ARG if the key was never set. */
kd_status kd_spec_get(const kd_spec* spec, const char* key, char* buf,
                      size_t buflen);

/* Selects a figure preset (fig1..fig5) at scale "paper" or "desk". */
kd_status kd_spec_apply_preset(kd_spec* spec, const char* name,
                               const char* scale);

/* Resumes a single run from a checkpoint file (not valid with presets). */
kd_status kd_spec_set_resume(kd_spec* spec, const char* checkpoint_path);

/* Worker-thread count for multi-run experiments; 0 = hardware concurrency.
 * The KICKED_DUO_WORKERS environment variable overrides both. */
kd_status kd_spec_set_workers(kd_spec* spec, int workers);

kd_status kd_spec_set_output_dir(kd_spec* spec, const char* dir);

/* Executes the experiment: runs every expanded unit, writes CSVs and
 * metadata sidecars under the output directory. Blocking. */
kd_status kd_run(const kd_spec* spec);

/* Diffs the delta2 columns of two time-series CSVs on identical n grids and
 * writes "n,delta2_qm,delta2_cl,diff" plus a .meta.json summary. Optional
 * out-params (may be NULL) receive max and mean |diff|. */
kd_status kd_compare_csv(const char* quantum_csv, const char* classical_csv,
                         const char* out_csv, double* max_abs_diff,
                         double* mean_abs_diff);

/* Message for the most recent failure on this thread ("" if none). */
const char* kd_last_error(void);

const char* kd_version(void);

/* Requests a cooperative stop: running evolutions finish the current kick,
 * write a checkpoint, and return. Async-signal-safe. */
void kd_request_interrupt(void);

#ifdef __cplusplus
}
#endif

#endif /* KICKED_DUO_H */
