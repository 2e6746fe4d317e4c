/* Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root. */
#ifndef EAGER_H
#define EAGER_H

/*
 * C API of the eager entity-resolution toolkit.
 *
 * The library matches entities across two knowledge graphs by feeding
 * attribute-string similarities and/or graph-embedding features into
 * supervised classifiers, and ships the rank-based statistical comparison
 * (Friedman + Nemenyi with critical-distance diagrams) used to evaluate such
 * systems.
 *
 * Conventions:
 *   - Every fallible function returns eager_status; EAGER_OK is 0.
 *   - On failure, *err (when non-NULL) receives a heap-allocated message the
 *     caller releases with eager_string_free(). Output parameters are only
 *     written on success.
 *   - Handles are opaque; free them with the matching *_free function.
 *   - The environment variable EAGER_THREADS caps internal parallelism.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eager_status {
    EAGER_OK = 0,
    EAGER_ERR_INPUT = 2,  /* unusable input: missing files, parse errors, bad config */
    EAGER_ERR_RUNTIME = 3 /* I/O or internal failure */
} eager_status;

typedef struct eager_dataset eager_dataset;
typedef struct eager_embeddings eager_embeddings;
typedef struct eager_model eager_model;

/* Library version (git describe). The pointer is static. */
const char* eager_version(void);

void eager_string_free(char* s);

/*
 * Tabular conversion. spec_json:
 *   {"kg1": [{"csv": "...", "schema": "..."}], "kg2": [...], "links": "..."}
 * Each schema file declares {id_column, attribute_columns, relation_columns,
 * entity_type}. Writes an OpenEA-layout directory (triple files, ent_links,
 * manifest.json) under out_dir.
 */
eager_status eager_convert(const char* spec_json, const char* out_dir, char** err);

/*
 * Loads an OpenEA-layout dataset directory. Missing 721_5fold directories are
 * generated from `seed` (7-2-1 split, five folds) and written back.
 */
eager_status eager_dataset_load(const char* dir, uint64_t seed, eager_dataset** out, char** err);
void eager_dataset_free(eager_dataset* ds);

/* Store cardinalities of both graphs plus the gold link count, as JSON. */
eager_status eager_dataset_stats_json(const eager_dataset* ds, char** json_out, char** err);

/*
 * Regenerates the fold split on disk. Fails when folds already exist unless
 * force is nonzero.
 */
eager_status eager_dataset_write_folds(const char* dir, uint64_t seed, int force, char** err);

/*
 * Trains translational embeddings on the two graphs merged through the given
 * fold's train links (fold in 1..5). transe_json may be NULL/"{}" or override
 * {dim, margin, learning_rate, epochs, negatives, norm, seed}. summary_out
 * (optional) receives {"initial_mean_loss": ..., "final_mean_loss": ...}.
 */
eager_status eager_embeddings_train(const eager_dataset* ds, int fold, const char* transe_json,
                                    eager_embeddings** out, char** summary_out, char** err);

/*
 * Reads/writes the embedding interop format: "dim=<d>" header, then
 * "<kg_index>\t<iri>\t<v1> ... <vd>" per entity. Loading requires every
 * entity of both graphs to be covered.
 */
eager_status eager_embeddings_load(const eager_dataset* ds, const char* path, eager_embeddings** out,
                                   char** err);
eager_status eager_embeddings_save(const eager_dataset* ds, const eager_embeddings* emb, const char* path,
                                   char** err);
void eager_embeddings_free(eager_embeddings* emb);

/*
 * Fraction of the fold's test links whose counterpart is among the k nearest
 * right-graph entities (Euclidean, exhaustive).
 */
eager_status eager_embeddings_hits(const eager_dataset* ds, const eager_embeddings* emb, int fold, int k,
                                   double* hits_out, char** err);

/*
 * Writes a labeled feature CSV ("f0..fN,label") for one fold and split
 * ("train", "validation" or "test"). variant: "A" (attribute similarities),
 * "E" (embedding pair features), "AE" (both). pair_mode: "concat", "diff" or
 * "hadamard". emb may be NULL for variant A. Negative pairs are sampled at
 * negative_ratio per positive with the full gold alignment forbidden.
 */
eager_status eager_featurize(const eager_dataset* ds, int fold, const char* split, const char* variant,
                             const char* pair_mode, const eager_embeddings* emb, double negative_ratio,
                             uint64_t seed, const char* out_csv, char** err);

/*
 * Trains a classifier on a feature CSV. classifier_json:
 *   {"kind": "rf"|"mlp", "rf": {...}, "mlp": {...}, "seed": ...}
 * validation_csv may be NULL (disables MLP early stopping).
 */
eager_status eager_train(const char* features_csv, const char* validation_csv, const char* classifier_json,
                         eager_model** out, char** err);

eager_status eager_model_save(const eager_model* model, const char* path, char** err);
eager_status eager_model_load(const char* path, eager_model** out, char** err);
void eager_model_free(eager_model* model);

/*
 * Scores a feature CSV. Writes "label,score" rows to out_csv (when non-NULL)
 * and, since feature CSVs carry labels, reports P/R/F via metrics_json_out
 * (when non-NULL).
 */
eager_status eager_predict(const eager_model* model, const char* features_csv, const char* out_csv,
                           char** metrics_json_out, char** err);

/*
 * Full 5-fold experiment from a run-config JSON file. Writes metrics.json
 * (byte-deterministic for a fixed config) and timings.json under out_dir;
 * metrics_json_out (optional) receives the metrics text. When
 * has_seed_override is nonzero, seed_override replaces the config seed.
 */
eager_status eager_run(const char* config_path, const char* out_dir, uint64_t seed_override,
                       int has_seed_override, char** metrics_json_out, char** err);

/*
 * Rank comparison from a score CSV (header: dataset,<method...>): average
 * ranks, Friedman test, Nemenyi critical distance at alpha (0.05 or 0.10).
 * Writes rank_report.json and cd_diagram.svg under out_dir (when non-NULL);
 * report_json_out (optional) receives the report text.
 */
eager_status eager_ranktest(const char* scores_csv, double alpha, const char* out_dir,
                            char** report_json_out, char** err);

#ifdef __cplusplus
}
#endif

#endif /* EAGER_H */
