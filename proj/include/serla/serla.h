/* C API for the SeRLA library: skill-prior learning from heterogeneous
 * demonstrations plus downstream skill-based soft actor-critic training.
 *
 * All functions return serla_status; on failure serla_last_error() holds a
 * human-readable message for the calling thread. Handles are opaque and
 * must be released with their matching _free function.
 */
#ifndef SERLA_H
#define SERLA_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum serla_status {
    SERLA_OK = 0,
    SERLA_ERR_INVALID_ARG = 1,
    SERLA_ERR_CONTRACT = 2,      /* precondition or invariant violated */
    SERLA_ERR_IO = 3,            /* file missing or unreadable/unwritable */
    SERLA_ERR_MALFORMED_FILE = 4,
    SERLA_ERR_VERSION_MISMATCH = 5,
    SERLA_ERR_SPEC_MISMATCH = 6, /* artifact belongs to a different env/config */
    SERLA_ERR_NUMERIC = 7,       /* training diverged (non-finite loss) */
    SERLA_ERR_CONFIGURATION = 8,
    SERLA_ERR_INTERNAL = 9
} serla_status;

const char* serla_status_name(serla_status status);

/* Thread-local message for the most recent failure. */
const char* serla_last_error(void);

/* ---- configuration ---------------------------------------------------- */

typedef struct serla_config serla_config;

serla_config* serla_config_create(void);
void serla_config_free(serla_config* cfg);

/* Flat `key = value` file; unknown keys are errors. */
serla_status serla_config_load_file(serla_config* cfg, const char* path);
serla_status serla_config_set(serla_config* cfg, const char* key, const char* value);
serla_status serla_config_hash(const serla_config* cfg, unsigned long long* out_hash);

/* ---- pipeline stages --------------------------------------------------- */

/* Writes expert.jsonl and general.jsonl into out_dir. */
serla_status serla_gen_data(const serla_config* cfg, const char* out_dir);

/* Consumes the datasets in data_dir; writes prior.ckpt and prior_log.csv. */
serla_status serla_train_prior(const serla_config* cfg, const char* data_dir,
                               const char* out_dir);

/* Consumes a prior checkpoint; writes policy.ckpt and rl_log.csv. */
serla_status serla_train_rl(const serla_config* cfg, const char* prior_ckpt,
                            const char* out_dir);

/* Greedy evaluation over `episodes` episodes. policy_ckpt may be NULL to
 * evaluate the untrained (prior-initialized) policy. */
serla_status serla_eval(const serla_config* cfg, const char* prior_ckpt,
                        const char* policy_ckpt, int episodes, double* mean_return_out);

/* Runs the SDE ablation grid and writes the comparison table as CSV. */
serla_status serla_ablate(const serla_config* cfg, const unsigned long long* seeds,
                          int n_seeds, const char* const* envs, int n_envs,
                          const char* work_dir, const char* out_csv);

/* Renders return-vs-env-steps curves (mean + seed band) from eval-log CSVs
 * into an SVG image plus a merged CSV table. */
serla_status serla_plot(const char* const* log_paths, int n_logs, const char* out_svg,
                        const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* SERLA_H */
