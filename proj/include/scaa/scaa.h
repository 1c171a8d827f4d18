/* scaa: binary supply-chain behavior analysis.
 *
 * Every function returns a scaa_status; on failure scaa_last_error() holds a
 * message for the calling thread until its next scaa_* call. Strings handed
 * out through char** parameters are owned by the caller and released with
 * scaa_string_free. Handles are released with their *_free function, which
 * accepts NULL. Handles may be shared between threads for reading.
 */
#ifndef SCAA_SCAA_H
#define SCAA_SCAA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(SCAA_BUILDING_LIBRARY)
#define SCAA_API __attribute__((visibility("default")))
#else
#define SCAA_API
#endif

typedef enum scaa_status {
  SCAA_OK = 0,
  SCAA_ERR_PARSE = 1,
  SCAA_ERR_SCHEMA = 2,
  SCAA_ERR_IO = 3,
  SCAA_ERR_UNKNOWN_NODE = 4,
  SCAA_ERR_UNKNOWN_LABEL = 5,
  SCAA_ERR_EMPTY_GOLDEN_SET = 6,
  SCAA_ERR_ANNOTATOR_FAILURE = 7,
  SCAA_ERR_INVALID_RULE = 8,
  SCAA_ERR_MISSING_ANNOTATION = 9,
  SCAA_ERR_MISSING_EMBEDDING = 10,
  SCAA_ERR_DIMENSION_MISMATCH = 11,
  SCAA_ERR_ZERO_VECTOR = 12,
  SCAA_ERR_CONFIG = 13,
  SCAA_ERR_SHAPE_MISMATCH = 14,
  SCAA_ERR_VERSION_MISMATCH = 15,
  SCAA_ERR_CORRUPT_FILE = 16,
  SCAA_ERR_EMPTY_GRAPH = 17,
  SCAA_ERR_NON_CONVERGENCE = 18,
  SCAA_ERR_EMPTY_TARGET = 19,
  SCAA_ERR_SINGLE_CLASS_INPUT = 20,
  SCAA_ERR_LENGTH_MISMATCH = 21,
  SCAA_ERR_INVALID_ARGUMENT = 22,
  SCAA_ERR_INTERNAL = 23
} scaa_status;

typedef enum scaa_evr_mode { SCAA_EVR_LATTICE_COVER = 0, SCAA_EVR_EXACT_TIER = 1 } scaa_evr_mode;

typedef struct scaa_config scaa_config;
typedef struct scaa_context scaa_context;
typedef struct scaa_cpg scaa_cpg;
typedef struct scaa_lattice scaa_lattice;
typedef struct scaa_kg scaa_kg;

SCAA_API const char* scaa_version(void);
SCAA_API const char* scaa_status_name(scaa_status status);
SCAA_API const char* scaa_last_error(void);
SCAA_API void scaa_string_free(char* s);

/* Configuration. Relative paths in a loaded file resolve against its
 * directory; paths in override patches resolve against the working directory. */
SCAA_API scaa_status scaa_config_default(scaa_config** out);
SCAA_API scaa_status scaa_config_load(const char* path, scaa_config** out);
/* JSON merge patch over the current settings. */
SCAA_API scaa_status scaa_config_override(scaa_config* cfg, const char* json_patch);
SCAA_API scaa_status scaa_config_set_seed(scaa_config* cfg, uint64_t seed);
SCAA_API scaa_status scaa_config_to_json(const scaa_config* cfg, char** out);
SCAA_API void scaa_config_free(scaa_config* cfg);

/* A context loads the lattice, embedding provider, annotator and CVE corpus
 * named by a config once, for use by the stage functions below. */
SCAA_API scaa_status scaa_context_create(const scaa_config* cfg, scaa_context** out);
SCAA_API void scaa_context_free(scaa_context* ctx);

/* Code property graphs. */
SCAA_API scaa_status scaa_cpg_load(const char* path, scaa_cpg** out);
SCAA_API scaa_status scaa_cpg_save(const scaa_cpg* g, const char* path);
SCAA_API size_t scaa_cpg_node_count(const scaa_cpg* g);
SCAA_API size_t scaa_cpg_edge_count(const scaa_cpg* g);
SCAA_API size_t scaa_cpg_function_count(const scaa_cpg* g);
/* Owned by the handle. */
SCAA_API const char* scaa_cpg_binary_id(const scaa_cpg* g);
/* *satisfied is 1 when every sink is PDG-reachable from its source; otherwise
 * 0 and *failing_index names the first failing claim. */
SCAA_API scaa_status scaa_cpg_verify_claims(const scaa_cpg* g, const int64_t* sources, const int64_t* sinks,
                                            size_t count, int* satisfied, size_t* failing_index);
SCAA_API void scaa_cpg_free(scaa_cpg* g);

/* Security-behavior lattice; labels are "TOP" or "Category/Action/Context". */
SCAA_API scaa_status scaa_lattice_default(scaa_lattice** out);
SCAA_API scaa_status scaa_lattice_load(const char* path, scaa_lattice** out);
SCAA_API scaa_status scaa_lattice_counts(const scaa_lattice* lat, size_t* categories, size_t* actions,
                                         size_t* risk_labels);
SCAA_API scaa_status scaa_lattice_leq(const scaa_lattice* lat, const char* a, const char* b, int* out);
SCAA_API scaa_status scaa_lattice_join(const scaa_lattice* lat, const char* a, const char* b, char** out);
SCAA_API scaa_status scaa_lattice_covers(const scaa_lattice* lat, const char* predicted, const char* truth,
                                         int* out);
SCAA_API scaa_status scaa_lattice_evr(const scaa_lattice* lat, const char* golden_path, scaa_evr_mode mode,
                                      double* out);
SCAA_API void scaa_lattice_free(scaa_lattice* lat);

/* Knowledge graphs written by scaa_build_ssckg. */
SCAA_API scaa_status scaa_kg_load(const char* path, scaa_kg** out);
SCAA_API size_t scaa_kg_entity_count(const scaa_kg* kg);
SCAA_API size_t scaa_kg_relation_count(const scaa_kg* kg);
SCAA_API scaa_status scaa_kg_stats_json(const scaa_kg* kg, size_t cpg_nodes, char** out);
SCAA_API void scaa_kg_free(scaa_kg* kg);

/* Pipeline stages. Optional path arguments accept NULL. */
SCAA_API scaa_status scaa_ingest(const char* cpg_in, const char* out);
SCAA_API scaa_status scaa_lift(const scaa_context* ctx, const char* cpg, const char* out, size_t* accepted,
                               size_t* rejected);
SCAA_API scaa_status scaa_build_ssckg(const scaa_context* ctx, const char* cpg, const char* corpus, const char* out);
/* JSON object {text: [values]} usable as a file embedding table. */
SCAA_API scaa_status scaa_embed_texts(const scaa_context* ctx, const char* const* texts, size_t count, char** out);
SCAA_API scaa_status scaa_forward(const scaa_context* ctx, const char* kg, const char* out);
SCAA_API scaa_status scaa_save_initial_weights(const scaa_context* ctx, const char* out);
/* cves: NULL uses the configured corpus. */
SCAA_API scaa_status scaa_score(const scaa_context* ctx, const char* kg, const char* cves, const char* out);
SCAA_API scaa_status scaa_fingerprint_extract(const char* embeddings, const int64_t* entity_ids, size_t count,
                                              const char* name, const char* provenance, const char* out);
/* repo: NULL uses the configured repository; tau < 0 uses the configured tau. */
SCAA_API scaa_status scaa_match(const scaa_context* ctx, const char* embeddings, const char* repo, double tau,
                                const char* out, size_t* alerts);
/* Grid and FPR cap come from the config. */
SCAA_API scaa_status scaa_threshold(const scaa_context* ctx, const char* scores, const char* out, double* tau);
SCAA_API scaa_status scaa_report(const scaa_context* ctx, const char* cpg, const char* corpus, const char* kg,
                                 const char* risk, const char* alerts, const char* out);
SCAA_API scaa_status scaa_export_dot(const scaa_context* ctx, const char* kg, const char* risk, const char* out);
SCAA_API scaa_status scaa_metrics(uint64_t tp, uint64_t fp, uint64_t tn, uint64_t fn, char** out);
SCAA_API scaa_status scaa_cohen_kappa(const char* const* rater_a, const char* const* rater_b, size_t count,
                                      double* out);

/* Full chain for one binary into out_dir. */
SCAA_API scaa_status scaa_run_pipeline(const scaa_context* ctx, const char* cpg, const char* out_dir,
                                       size_t* alerts);
/* Several binaries on up to `jobs` threads, each into out_root/<file stem>. */
SCAA_API scaa_status scaa_run_pipelines(const scaa_context* ctx, const char* const* cpgs, size_t count,
                                        const char* out_root, size_t jobs, size_t* alerts);

#ifdef __cplusplus
}
#endif

#endif
