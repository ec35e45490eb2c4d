/*
 * opssc — smart-contract-driven system operations on a simulated
 * permissioned blockchain, plus the companion operational cost model.
 *
 * C API over opaque handles. Every function returns an opssc_status; on
 * failure, opssc_last_error() describes the problem (thread-local). Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with opssc_string_free().
 */
#ifndef OPSSC_H
#define OPSSC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct opssc_network opssc_network; /* opaque simulated network + run directory */

typedef enum opssc_status {
    OPSSC_OK = 0,
    OPSSC_ERR_INVALID_ARG = 1, /* null pointers, bad flags */
    OPSSC_ERR_VALIDATION = 2,  /* config/policy/parameter validation */
    OPSSC_ERR_REJECTED = 3,    /* transaction rejected by the network */
    OPSSC_ERR_INTEGRITY = 4,   /* ledger or dump integrity failure */
    OPSSC_ERR_NOT_FOUND = 5,   /* unknown exec/policy/run */
    OPSSC_ERR_IO = 6,          /* filesystem problems */
    OPSSC_ERR_INTERNAL = 7
} opssc_status;

const char* opssc_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* opssc_last_error(void);

void opssc_string_free(char* s);

/* ---- network lifecycle ------------------------------------------------- */

/* Builds a network from a topology config (JSON text) with its run state
 * under run_root: sandboxes, shared repo, manifest, chain dump. */
opssc_status opssc_network_create(const char* config_json, const char* run_root,
                                  opssc_network** out);

/* Rebuilds a saved run by replaying run_root/chain.dump. */
opssc_status opssc_network_load(const char* run_root, opssc_network** out);

/* Writes the current chain dump back to the run directory. */
opssc_status opssc_network_save(opssc_network* net);

void opssc_network_destroy(opssc_network* net);

/* ---- policies and operations ------------------------------------------- */

/* Registers a policy from JSON (format opssc-policy/1); *op_id_out receives
 * the committed op id. Rejections map to OPSSC_ERR_REJECTED. */
opssc_status opssc_policy_register_json(opssc_network* net, const char* policy_json,
                                        char** op_id_out);

/* Registers a built-in policy; `which` is currently "sc-install". */
opssc_status opssc_policy_register_builtin(opssc_network* net, const char* which,
                                           char** op_id_out);

/* Publishes an artifact into the shared repository. */
opssc_status opssc_repo_publish(opssc_network* net, const char* name, const char* version,
                                const void* payload, size_t payload_len);

/* Executes an operation. params_json is a flat string map (may be NULL or
 * ""). On success *exec_id_out and *phase_out are set; in deterministic
 * mode the call returns after the network is quiescent. */
opssc_status opssc_op_run(opssc_network* net, const char* op_id, const char* params_json,
                          char** exec_id_out, char** phase_out);

/* Advances the periodic scheduler; *execs_json_out receives a JSON array of
 * {exec_id, phase} for executions the ticks issued. */
opssc_status opssc_run_ticks(opssc_network* net, uint64_t ticks, char** execs_json_out);

opssc_status opssc_execution_status(opssc_network* net, const char* exec_id,
                                    char** status_json_out);

/* Deploys/upgrades an installed contract under the network consensus
 * policy; fails with OPSSC_ERR_REJECTED ("not_installed_everywhere") when
 * any consenting org misses the install. */
opssc_status opssc_deploy(opssc_network* net, const char* sc_name, const char* version,
                          char** result_out);

/* ---- ledger inspection --------------------------------------------------*/

/* OK iff every replica verifies and all replicas are state-equal. */
opssc_status opssc_ledger_verify(opssc_network* net);

/* Structural verification of a dump file (no network needed). */
opssc_status opssc_dump_verify_file(const char* path);

opssc_status opssc_ledger_history(opssc_network* net, const char* exec_id, char** json_out);
opssc_status opssc_ledger_dump(opssc_network* net, const char* path);
opssc_status opssc_chain_summary(opssc_network* net, char** json_out);

/* ---- fault injection (testing) ------------------------------------------*/

/* Withholds endorsements of an org (endorsing nodes unreachable). */
opssc_status opssc_set_org_offline(opssc_network* net, const char* org_id, int offline);

/* Pauses/resumes an org's agent; on resume the event backlog is drained. */
opssc_status opssc_set_agent_enabled(opssc_network* net, const char* org_id, int enabled);

/* ---- bench ---------------------------------------------------------------*/

/* Runs the installation operation `repetitions` times (after `warmup`
 * discarded trials) on a threads-mode network built from config_json,
 * streaming a CSV to csv_path. *summary_json_out (optional) receives
 * {rows, mean_submit_to_commit_ms, max_submit_to_commit_ms,
 *  max_completion_gap_ms}. Deterministic-mode configs are refused. */
opssc_status opssc_bench_run(const char* config_json, const char* run_root,
                             uint32_t repetitions, uint32_t warmup, const char* csv_path,
                             char** summary_json_out);

/* ---- cost model ----------------------------------------------------------*/

/* params_json: format opssc-cost-params/1 (see docs/file-formats.md).
 * method: "conventional" | "proposed" | "both"; model: 1 or 2.
 * *csv_out receives one row per n in [n_from, n_to]. */
opssc_status opssc_cost_estimate_csv(const char* params_json, const char* method, int model,
                                     uint64_t n_from, uint64_t n_to, char** csv_out);

/* Headline numbers at a single n: man-hours rounded half-up to one decimal
 * and the reduction as a whole percent. Output pointers may be NULL. */
opssc_status opssc_cost_headline(const char* params_json, uint64_t n, int model,
                                 double* conventional_mh, double* proposed_mh,
                                 int* reduction_pct);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* OPSSC_H */
