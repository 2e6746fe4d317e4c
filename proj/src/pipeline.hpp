// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dataset.hpp"
#include "embedding.hpp"
#include "ingest.hpp"
#include "mlp.hpp"
#include "model.hpp"
#include "rf.hpp"

namespace eager {

// One experiment: dataset, feature variant, embedding source, classifier and
// seeds, declared as a single JSON document so a run's provenance is one
// artifact.
struct RunConfig {
    std::string dataset_dir;
    Variant variant = Variant::AE;
    PairMode pair_mode = PairMode::concat;
    enum class EmbeddingSource { train, file } embedding_source = EmbeddingSource::train;
    std::string embedding_path;  // when source == file
    TransEConfig transe;
    ClassifierKind classifier = ClassifierKind::rf;
    RandomForestConfig rf;
    MLPConfig mlp;
    double negative_ratio = 1.0;
    GjMatching gj_matching = GjMatching::greedy;
    uint64_t seed = 0;
    // Set by the parser; embedding variants demand an explicit section.
    bool embedding_given = true;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j, const std::string& origin);
    // Canonical echo with every field present; hashing this yields the
    // config hash embedded in outputs.
    nlohmann::json to_json() const;

    void validate() const;
};

// Executes the 5-fold protocol: per fold train (embedding when the variant
// uses one, fused on that fold's train links), predict on test positives plus
// sampled negatives, and report P/R/F per fold plus the mean over folds.
// Writes <out_dir>/metrics.json (byte-deterministic for a fixed config) and
// <out_dir>/timings.json (wall clock, excluded from the determinism
// contract). Returns the metrics JSON text.
std::string run_experiment(const RunConfig& cfg, const std::string& out_dir);

// Tabular conversion: one or more (csv, schema) tables per side plus a
// two-column link CSV. Link cells containing '/' are taken as entity IRIs;
// bare ids resolve against the side's first table type.
struct TableSpec {
    std::string csv_path;
    std::string schema_path;
};

void convert_tables(const std::vector<TableSpec>& kg1_tables, const std::vector<TableSpec>& kg2_tables,
                    const std::string& links_csv, const std::string& out_dir);

// ranktest: score matrix -> rank report JSON + CD diagram SVG under out_dir.
std::string run_ranktest(const std::string& scores_csv, double alpha, const std::string& out_dir);

const char* version_string();

}  // namespace eager
