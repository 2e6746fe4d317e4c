// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "eager/eager.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "dataset.hpp"
#include "embedding.hpp"
#include "evaluation.hpp"
#include "ingest.hpp"
#include "model.hpp"
#include "pipeline.hpp"
#include "rng.hpp"

using namespace eager;

struct eager_dataset {
    DatasetBundle bundle;
    // Profiles are built lazily and cached; featurize calls reuse them.
    std::vector<std::string> profiles1, profiles2;
    bool profiles_ready = false;
};

struct eager_embeddings {
    EmbeddingTable table;
};

struct eager_model {
    TrainedModel model;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

eager_status status_of(const Error& e) {
    return e.kind() == ErrKind::invalid_input ? EAGER_ERR_INPUT : EAGER_ERR_RUNTIME;
}

template <typename Fn>
eager_status guarded(char** err, Fn&& fn) {
    try {
        fn();
        return EAGER_OK;
    } catch (const Error& e) {
        if (err) *err = dup_string(e.what());
        return status_of(e);
    } catch (const std::exception& e) {
        if (err) *err = dup_string(e.what());
        return EAGER_ERR_RUNTIME;
    }
}

void require(bool cond, const char* what) {
    if (!cond) throw Error::invalid(what);
}

const Fold& fold_of(const eager_dataset* ds, int fold) {
    require(fold >= 1 && fold <= int(kFoldCount), "fold must be in 1..5");
    return ds->bundle.folds[std::size_t(fold - 1)];
}

void ensure_profiles(eager_dataset* ds) {
    if (ds->profiles_ready) return;
    ds->profiles1 = build_profiles(ds->bundle.kg1);
    ds->profiles2 = build_profiles(ds->bundle.kg2);
    ds->profiles_ready = true;
}

}  // namespace

extern "C" {

const char* eager_version(void) { return version_string(); }

void eager_string_free(char* s) { std::free(s); }

eager_status eager_convert(const char* spec_json, const char* out_dir, char** err) {
    return guarded(err, [&] {
        require(spec_json && out_dir, "spec_json and out_dir are required");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(spec_json);
        } catch (const nlohmann::json::exception& e) {
            throw Error::invalid("convert spec: malformed JSON: ", e.what());
        }
        auto tables = [&](const char* key) {
            std::vector<TableSpec> out;
            for (const auto& t : j.at(key))
                out.push_back({t.at("csv").get<std::string>(), t.at("schema").get<std::string>()});
            return out;
        };
        try {
            convert_tables(tables("kg1"), tables("kg2"), j.at("links").get<std::string>(), out_dir);
        } catch (const nlohmann::json::exception& e) {
            throw Error::invalid("convert spec: ", e.what());
        }
    });
}

eager_status eager_dataset_load(const char* dir, uint64_t seed, eager_dataset** out, char** err) {
    return guarded(err, [&] {
        require(dir && out, "dir and out are required");
        auto ds = std::make_unique<eager_dataset>();
        ds->bundle = load_openea_dataset(dir, seed);
        *out = ds.release();
    });
}

void eager_dataset_free(eager_dataset* ds) { delete ds; }

eager_status eager_dataset_stats_json(const eager_dataset* ds, char** json_out, char** err) {
    return guarded(err, [&] {
        require(ds && json_out, "dataset and json_out are required");
        auto stats = [](const KgStats& s) {
            return nlohmann::json{{"entities", s.entities},
                                  {"relations", s.relations},
                                  {"attributes", s.attributes},
                                  {"rel_triples", s.rel_triples},
                                  {"attr_triples", s.attr_triples}};
        };
        nlohmann::json j = {{"kg1", stats(ds->bundle.kg1.stats())},
                            {"kg2", stats(ds->bundle.kg2.stats())},
                            {"links", ds->bundle.gold.size()},
                            {"folds_from_disk", ds->bundle.folds_from_disk}};
        *json_out = dup_string(j.dump(2));
    });
}

eager_status eager_dataset_write_folds(const char* dir, uint64_t seed, int force, char** err) {
    return guarded(err, [&] {
        require(dir, "dir is required");
        namespace fs = std::filesystem;
        fs::path fold_root = fs::path(dir) / "721_5fold";
        if (fs::exists(fold_root)) {
            if (!force) throw Error::invalid(dir, ": 721_5fold already exists (use force to regenerate)");
            fs::remove_all(fold_root);
        }
        DatasetBundle bundle = load_openea_dataset(dir, seed);  // regenerates and writes folds
        (void)bundle;
    });
}

eager_status eager_embeddings_train(const eager_dataset* ds, int fold, const char* transe_json,
                                    eager_embeddings** out, char** summary_out, char** err) {
    return guarded(err, [&] {
        require(ds && out, "dataset and out are required");
        const Fold& f = fold_of(ds, fold);
        TransEConfig cfg;
        if (transe_json && *transe_json) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(transe_json);
            } catch (const nlohmann::json::exception& e) {
                throw Error::invalid("transe config: malformed JSON: ", e.what());
            }
            cfg.dim = j.value("dim", cfg.dim);
            cfg.margin = j.value("margin", cfg.margin);
            cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
            cfg.epochs = j.value("epochs", cfg.epochs);
            cfg.negatives_per_positive = j.value("negatives", cfg.negatives_per_positive);
            cfg.seed = j.value("seed", cfg.seed);
            std::string norm = j.value("norm", "L2");
            if (norm == "L1") cfg.norm = TransEConfig::Norm::L1;
            else if (norm == "L2") cfg.norm = TransEConfig::Norm::L2;
            else throw Error::invalid("transe config: norm must be L1 or L2");
        }
        MergedGraph merged = merge_graphs(ds->bundle.kg1, ds->bundle.kg2, f.train);
        TransEResult result = train_transe(merged, ds->bundle.kg1, ds->bundle.kg2, cfg);
        if (summary_out) {
            nlohmann::json s = {{"initial_mean_loss", result.initial_mean_loss},
                                {"final_mean_loss", result.final_mean_loss},
                                {"epochs", cfg.epochs},
                                {"dim", cfg.dim}};
            *summary_out = dup_string(s.dump(2));
        }
        *out = new eager_embeddings{std::move(result.table)};
    });
}

eager_status eager_embeddings_load(const eager_dataset* ds, const char* path, eager_embeddings** out,
                                   char** err) {
    return guarded(err, [&] {
        require(ds && path && out, "dataset, path and out are required");
        *out = new eager_embeddings{load_embeddings(path, ds->bundle.kg1, ds->bundle.kg2)};
    });
}

eager_status eager_embeddings_save(const eager_dataset* ds, const eager_embeddings* emb, const char* path,
                                   char** err) {
    return guarded(err, [&] {
        require(ds && emb && path, "dataset, embeddings and path are required");
        save_embeddings(emb->table, ds->bundle.kg1, ds->bundle.kg2, path);
    });
}

void eager_embeddings_free(eager_embeddings* emb) { delete emb; }

eager_status eager_embeddings_hits(const eager_dataset* ds, const eager_embeddings* emb, int fold, int k,
                                   double* hits_out, char** err) {
    return guarded(err, [&] {
        require(ds && emb && hits_out, "dataset, embeddings and hits_out are required");
        *hits_out = nn_hits(emb->table, fold_of(ds, fold).test, k);
    });
}

eager_status eager_featurize(const eager_dataset* ds_const, int fold, const char* split, const char* variant,
                             const char* pair_mode, const eager_embeddings* emb, double negative_ratio,
                             uint64_t seed, const char* out_csv, char** err) {
    return guarded(err, [&] {
        require(ds_const && split && variant && out_csv, "dataset, split, variant and out_csv are required");
        auto* ds = const_cast<eager_dataset*>(ds_const);
        const Fold& f = fold_of(ds, fold);
        const AlignmentSet* positives = nullptr;
        uint64_t stream;
        std::string split_s(split);
        if (split_s == "train") { positives = &f.train; stream = 11; }
        else if (split_s == "validation") { positives = &f.validation; stream = 12; }
        else if (split_s == "test") { positives = &f.test; stream = 13; }
        else throw Error::invalid("split must be train, validation or test, got '", split_s, "'");

        Variant v = variant_from_string(variant);
        PairMode mode = pair_mode ? pair_mode_from_string(pair_mode) : PairMode::concat;
        if (v != Variant::A) require(emb != nullptr, "variant E/AE requires embeddings");
        if (v != Variant::E) ensure_profiles(ds);

        const uint64_t fold_seed = derive_seed(seed, 100 + uint64_t(fold - 1));
        std::vector<LabeledPair> pairs =
            sample_negatives(positives->pairs(), ds->bundle.kg1, ds->bundle.kg2, ds->bundle.gold,
                             negative_ratio, derive_seed(fold_seed, stream));
        FeatureMatrix m = assemble_features(pairs, v, ds->profiles1, ds->profiles2,
                                            emb ? &emb->table : nullptr, mode);
        write_feature_csv(m, out_csv);
    });
}

eager_status eager_train(const char* features_csv, const char* validation_csv, const char* classifier_json,
                         eager_model** out, char** err) {
    return guarded(err, [&] {
        require(features_csv && out, "features_csv and out are required");
        FeatureMatrix train = read_feature_csv(features_csv);
        FeatureMatrix valid;
        bool has_valid = false;
        if (validation_csv && *validation_csv) {
            valid = read_feature_csv(validation_csv);
            has_valid = true;
        }
        ClassifierKind kind = ClassifierKind::rf;
        nlohmann::json j = nlohmann::json::object();
        if (classifier_json && *classifier_json) {
            try {
                j = nlohmann::json::parse(classifier_json);
            } catch (const nlohmann::json::exception& e) {
                throw Error::invalid("classifier config: malformed JSON: ", e.what());
            }
            kind = classifier_kind_from_string(j.value("kind", "rf"));
        }
        uint64_t seed = j.value("seed", uint64_t{0});
        if (kind == ClassifierKind::rf) {
            RandomForestConfig cfg =
                j.contains("rf") ? RandomForestConfig::from_json(j.at("rf")) : RandomForestConfig{};
            if (!j.contains("rf") || !j.at("rf").contains("seed")) cfg.seed = seed;
            *out = new eager_model{TrainedModel(RandomForest::train(train, cfg), cfg)};
        } else {
            MLPConfig cfg = j.contains("mlp") ? MLPConfig::from_json(j.at("mlp")) : MLPConfig{};
            if (!j.contains("mlp") || !j.at("mlp").contains("seed")) cfg.seed = seed;
            *out = new eager_model{TrainedModel(MLPModel::train(train, has_valid ? &valid : nullptr, cfg), cfg)};
        }
    });
}

eager_status eager_model_save(const eager_model* model, const char* path, char** err) {
    return guarded(err, [&] {
        require(model && path, "model and path are required");
        model->model.save(path);
    });
}

eager_status eager_model_load(const char* path, eager_model** out, char** err) {
    return guarded(err, [&] {
        require(path && out, "path and out are required");
        *out = new eager_model{TrainedModel::load(path)};
    });
}

void eager_model_free(eager_model* model) { delete model; }

eager_status eager_predict(const eager_model* model, const char* features_csv, const char* out_csv,
                           char** metrics_json_out, char** err) {
    return guarded(err, [&] {
        require(model && features_csv, "model and features_csv are required");
        FeatureMatrix data = read_feature_csv(features_csv);
        auto [labels, scores] = model->model.predict(data);
        if (out_csv) {
            std::ofstream o(out_csv, std::ios::binary);
            if (!o) throw Error::io("cannot write predictions: ", out_csv);
            o << "label,score\n";
            char buf[32];
            for (std::size_t i = 0; i < labels.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", scores[i]);
                o << labels[i] << ',' << buf << '\n';
            }
        }
        if (metrics_json_out) {
            PRF m = prf(data.labels, labels);
            nlohmann::json j = {{"precision", m.precision}, {"recall", m.recall},
                                {"f_measure", m.f_measure}, {"tp", m.tp},
                                {"fp", m.fp},               {"fn", m.fn},
                                {"tn", m.tn},               {"rows", labels.size()}};
            *metrics_json_out = dup_string(j.dump(2));
        }
    });
}

eager_status eager_run(const char* config_path, const char* out_dir, uint64_t seed_override,
                       int has_seed_override, char** metrics_json_out, char** err) {
    return guarded(err, [&] {
        require(config_path, "config_path is required");
        RunConfig cfg = RunConfig::from_file(config_path);
        if (has_seed_override) cfg.seed = seed_override;
        std::string metrics = run_experiment(cfg, out_dir ? out_dir : "");
        if (metrics_json_out) *metrics_json_out = dup_string(metrics);
    });
}

eager_status eager_ranktest(const char* scores_csv, double alpha, const char* out_dir,
                            char** report_json_out, char** err) {
    return guarded(err, [&] {
        require(scores_csv, "scores_csv is required");
        std::string report = run_ranktest(scores_csv, alpha, out_dir ? out_dir : "");
        if (report_json_out) *report_json_out = dup_string(report);
    });
}

}  // extern "C"
