#ifndef RLVR_H
#define RLVR_H

/* C API for the RLVR toolkit: rule-based reward scoring, GRPO utilities,
 * a desk-scale GRPO trainer, evaluation statistics, data curation filters,
 * and an HTTP scoring service.
 *
 * Conventions:
 *   - Every fallible call returns rlvr_status; rlvr_last_error() describes
 *     the most recent failure on the calling thread.
 *   - Strings returned through char** out parameters are allocated by the
 *     library and must be released with rlvr_string_free().
 *   - Handles are opaque; free them with their matching *_free function.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rlvr_status {
  RLVR_OK = 0,
  RLVR_EINVAL = 1,   /* invalid argument or config value */
  RLVR_EPARSE = 2,   /* malformed JSON/JSONL input */
  RLVR_EIO = 3,      /* file cannot be opened/read/written */
  RLVR_EINTERNAL = 4 /* unexpected internal failure */
} rlvr_status;

typedef enum rlvr_format_status {
  RLVR_FORMAT_OK = 0,
  RLVR_FORMAT_MISSING_EOS = 1,
  RLVR_FORMAT_INVALID_THINK_BLOCK = 2
} rlvr_format_status;

typedef struct rlvr_config rlvr_config;
typedef struct rlvr_scorer rlvr_scorer;
typedef struct rlvr_server rlvr_server;

const char* rlvr_version(void);

/* Thread-local message for the last failing call on this thread. */
const char* rlvr_last_error(void);

void rlvr_string_free(char* s);

/* ---- configuration ---- */

rlvr_status rlvr_config_default(rlvr_config** out);
rlvr_status rlvr_config_from_json(const char* json_text, rlvr_config** out);
rlvr_status rlvr_config_from_file(const char* path, rlvr_config** out);
rlvr_status rlvr_config_to_json(const rlvr_config* config, char** out_json);
void rlvr_config_free(rlvr_config* config);

/* ---- reward primitives ---- */

rlvr_status rlvr_scaled_accuracy_reward(const rlvr_config* config, int correct, long length,
                                        double* out);

/* Word-level repetition penalty of a whitespace-tokenized text, in [-1, 0]. */
rlvr_status rlvr_repetition_penalty(const rlvr_config* config, const char* text, double* out);

rlvr_status rlvr_check_format(const char* text, int eos_present, rlvr_format_status* out);

/* Normalized form of a raw answer string. */
rlvr_status rlvr_normalize_answer(const char* raw, char** out);

/* CSV with header length,correct_reward,incorrect_reward and one row per
 * length 0..l_max. */
rlvr_status rlvr_reward_curve(const rlvr_config* config, long step, char** out_csv);

/* ---- scoring ---- */

rlvr_status rlvr_scorer_new(const rlvr_config* config, rlvr_scorer** out);

/* request_json: {"response_text", "gold_answer", "completion_tokens",
 * "eos_present", optional "prompt_tokens"}. Returns the full breakdown plus
 * verdict/method as a single JSON line. */
rlvr_status rlvr_score_json(const rlvr_scorer* scorer, const char* request_json,
                            char** out_response_json);
void rlvr_scorer_free(rlvr_scorer* scorer);

/* ---- GRPO ---- */

/* Group-relative advantages of n rewards (population std; zeros when the
 * group is degenerate). out must hold n doubles. */
rlvr_status rlvr_group_advantages(const double* rewards, int n, double* out);

/* Analytic-vs-finite-difference check of the GRPO objective gradient on
 * random toy instances. Report JSON: {"instances", "coords_checked",
 * "worst_rel_error", "tolerance", "pass"}. */
rlvr_status rlvr_grpo_gradient_check(unsigned long long seed, int instances, double tolerance,
                                     char** out_report_json);

/* ---- toy trainer ---- */

/* options_json uses toy defaults for missing keys (steps, batch_size,
 * max_tokens, context_window, temperature, init_scale, inner_updates,
 * warmup_steps, momentum, heldout_size, seed, difficulty_mix, and nested
 * "reward"/"grpo" sections). Writes one metrics JSON line per step to
 * metrics_jsonl_path and the best checkpoint to checkpoint_path (either may
 * be NULL). The summary JSON reports baseline/best/final held-out accuracy
 * and the length-gap slope. */
rlvr_status rlvr_train_toy(const char* options_json, const char* metrics_jsonl_path,
                           const char* checkpoint_path, char** out_summary_json);

/* ---- evaluation ---- */

/* records_jsonl_path: GenerationRecord JSONL. benchmark_id may be NULL when
 * the file holds a single benchmark. runs_limit 0 keeps all runs, otherwise
 * the first N in sorted run_id order. bandwidth <= 0 selects Silverman's
 * rule. Any of the three outputs may be NULL. */
rlvr_status rlvr_eval_report(const char* records_jsonl_path, const char* benchmark_id,
                             int runs_limit, double bandwidth, char** out_report_json,
                             char** out_difficulty_csv, char** out_topic_csv);

/* ---- curation ---- */

/* corpus: JSONL of {"seed_id", "prompt"}; benchmarks: JSONL of
 * {"benchmark_id", "prompt"}. Emits one JSONL line per flagged prompt:
 * {"seed_id", "benchmark_id", "overlap", "rule"}. */
rlvr_status rlvr_decontaminate(const char* corpus_jsonl_path, const char* benchmarks_jsonl_path,
                               int ngram, double threshold, char** out_flagged_jsonl);

/* records: JSONL of {"seed_id", "prompt", "strong_model_answers",
 * "weak_model_answers", optional "proxy_gold"}. Emits one JSONL line per
 * record: {"seed_id", "proxy_gold", "agreement_rate", "keep", "reason"}. */
rlvr_status rlvr_curate_difficulty(const char* records_jsonl_path, double band_lo,
                                   double band_hi, char** out_jsonl);

/* ---- HTTP service ---- */

/* Starts the scoring service for the config's service section (port 0 binds
 * an ephemeral port). */
rlvr_status rlvr_server_start(const rlvr_config* config, rlvr_server** out);
int rlvr_server_port(const rlvr_server* server);
rlvr_status rlvr_server_stop(rlvr_server* server);
void rlvr_server_free(rlvr_server* server);

#ifdef __cplusplus
}
#endif

#endif /* RLVR_H */
