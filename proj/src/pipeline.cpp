// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "csv.hpp"
#include "evaluation.hpp"
#include "rng.hpp"
#include "unicode.hpp"
#include "eager/version.hpp"

namespace fs = std::filesystem;

namespace eager {

const char* version_string() { return EAGER_VERSION; }

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& origin, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw Error::invalid(origin, ": unknown ", where, " key '", key, "'");
    }
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::io("cannot open config file: ", path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error::invalid(path, ": malformed JSON: ", e.what());
    }
    return from_json(j, path);
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::string& origin) {
    reject_unknown_keys(j,
                        {"dataset_dir", "variant", "pair_mode", "embedding", "classifier", "negative_ratio",
                         "gj_matching", "seed"},
                        origin, "config");
    RunConfig cfg;
    try {
        cfg.dataset_dir = j.at("dataset_dir").get<std::string>();
        cfg.variant = variant_from_string(j.at("variant").get<std::string>());
        if (j.contains("pair_mode")) cfg.pair_mode = pair_mode_from_string(j.at("pair_mode").get<std::string>());
        if (j.contains("negative_ratio")) cfg.negative_ratio = j.at("negative_ratio").get<double>();
        if (j.contains("gj_matching")) {
            std::string m = j.at("gj_matching").get<std::string>();
            if (m == "greedy") cfg.gj_matching = GjMatching::greedy;
            else if (m == "optimal") cfg.gj_matching = GjMatching::optimal;
            else throw Error::invalid(origin, ": gj_matching must be greedy or optimal");
        }
        if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();

        cfg.embedding_given = j.contains("embedding");
        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            reject_unknown_keys(
                e, {"source", "path", "dim", "margin", "learning_rate", "epochs", "negatives", "norm"}, origin,
                "embedding");
            std::string source = e.value("source", "train");
            if (source == "train") cfg.embedding_source = EmbeddingSource::train;
            else if (source == "file") cfg.embedding_source = EmbeddingSource::file;
            else throw Error::invalid(origin, ": embedding.source must be train or file");
            cfg.embedding_path = e.value("path", "");
            cfg.transe.dim = e.value("dim", cfg.transe.dim);
            cfg.transe.margin = e.value("margin", cfg.transe.margin);
            cfg.transe.learning_rate = e.value("learning_rate", cfg.transe.learning_rate);
            cfg.transe.epochs = e.value("epochs", cfg.transe.epochs);
            cfg.transe.negatives_per_positive = e.value("negatives", cfg.transe.negatives_per_positive);
            std::string norm = e.value("norm", "L2");
            if (norm == "L1") cfg.transe.norm = TransEConfig::Norm::L1;
            else if (norm == "L2") cfg.transe.norm = TransEConfig::Norm::L2;
            else throw Error::invalid(origin, ": embedding.norm must be L1 or L2");
        }

        if (j.contains("classifier")) {
            const auto& c = j.at("classifier");
            reject_unknown_keys(c, {"kind", "rf", "mlp"}, origin, "classifier");
            cfg.classifier = classifier_kind_from_string(c.value("kind", "rf"));
            if (c.contains("rf")) cfg.rf = RandomForestConfig::from_json(c.at("rf"));
            if (c.contains("mlp")) cfg.mlp = MLPConfig::from_json(c.at("mlp"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error::invalid(origin, ": config structure invalid: ", e.what());
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    if (dataset_dir.empty()) throw Error::invalid("config: dataset_dir is required");
    if (variant != Variant::A) {
        if (!embedding_given)
            throw Error::invalid("config: an embedding section is required unless variant is A");
        if (embedding_source == EmbeddingSource::file && embedding_path.empty())
            throw Error::invalid("config: embedding.path is required when embedding.source is file");
        transe.validate();
    }
    if (negative_ratio <= 0) throw Error::invalid("config: negative_ratio must be > 0");
    rf.validate();
    mlp.validate();
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json emb = {
        {"source", embedding_source == EmbeddingSource::train ? "train" : "file"},
        {"path", embedding_path},
        {"dim", transe.dim},
        {"margin", transe.margin},
        {"learning_rate", transe.learning_rate},
        {"epochs", transe.epochs},
        {"negatives", transe.negatives_per_positive},
        {"norm", transe.norm == TransEConfig::Norm::L1 ? "L1" : "L2"},
    };
    return {{"dataset_dir", dataset_dir},
            {"variant", std::string(to_string(variant))},
            {"pair_mode", std::string(to_string(pair_mode))},
            {"embedding", std::move(emb)},
            {"classifier",
             {{"kind", std::string(to_string(classifier))}, {"rf", rf.to_json()}, {"mlp", mlp.to_json()}}},
            {"negative_ratio", negative_ratio},
            {"gj_matching", gj_matching == GjMatching::greedy ? "greedy" : "optimal"},
            {"seed", seed}};
}

namespace {

// Type of a KG1 entity: the lexicographically smallest value of its "type"
// attribute, empty when untyped.
std::string entity_type_of(const KnowledgeGraph& kg, EntityId e) {
    std::string best;
    for (const AttrTriple& t : kg.attrs_of(e)) {
        if (kg.attribute_iri(t.attr) != "type") continue;
        const std::string& v = kg.literal(t.value);
        if (best.empty() || v < best) best = v;
    }
    return best;
}

nlohmann::json prf_json(const PRF& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f_measure", m.f_measure},
            {"tp", m.tp},               {"fp", m.fp},         {"fn", m.fn},
            {"tn", m.tn}};
}

struct FoldTimings {
    double embed_s = 0, features_s = 0, train_s = 0, predict_s = 0;
};

}  // namespace

std::string run_experiment(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const double t_start = now_seconds();

    DatasetBundle bundle = load_openea_dataset(cfg.dataset_dir, cfg.seed);
    if (bundle.folds[0].train.empty())
        throw Error::invalid("dataset ", cfg.dataset_dir, " carries no folds (needs at least 10 gold links)");

    const bool needs_profiles = cfg.variant != Variant::E;
    std::vector<std::string> profiles1, profiles2;
    if (needs_profiles) {
        profiles1 = build_profiles(bundle.kg1);
        profiles2 = build_profiles(bundle.kg2);
    }

    const bool needs_embedding = cfg.variant != Variant::A;
    std::optional<EmbeddingTable> file_embeddings;
    if (needs_embedding && cfg.embedding_source == RunConfig::EmbeddingSource::file)
        file_embeddings = load_embeddings(cfg.embedding_path, bundle.kg1, bundle.kg2);

    nlohmann::json folds_json = nlohmann::json::array();
    std::vector<FoldTimings> timings(kFoldCount);
    double sum_p = 0, sum_r = 0, sum_f = 0;

    for (std::size_t f = 0; f < kFoldCount; ++f) {
        const Fold& fold = bundle.folds[f];
        const uint64_t fold_seed = derive_seed(cfg.seed, 100 + f);
        nlohmann::json fold_json;
        fold_json["fold"] = f + 1;

        double t0 = now_seconds();
        std::optional<EmbeddingTable> trained;
        const EmbeddingTable* table = nullptr;
        if (needs_embedding) {
            if (cfg.embedding_source == RunConfig::EmbeddingSource::train) {
                // Only this fold's train links fuse entities; validation and
                // test pairs never inform the embedding.
                MergedGraph merged = merge_graphs(bundle.kg1, bundle.kg2, fold.train);
                TransEConfig tcfg = cfg.transe;
                tcfg.seed = derive_seed(fold_seed, 7);
                TransEResult result = train_transe(merged, bundle.kg1, bundle.kg2, tcfg);
                fold_json["embedding"] = {{"initial_mean_loss", result.initial_mean_loss},
                                          {"final_mean_loss", result.final_mean_loss}};
                trained = std::move(result.table);
                table = &*trained;
            } else {
                table = &*file_embeddings;
            }
        }
        timings[f].embed_s = now_seconds() - t0;

        t0 = now_seconds();
        auto labeled = [&](const AlignmentSet& positives, uint64_t stream) {
            return sample_negatives(positives.pairs(), bundle.kg1, bundle.kg2, bundle.gold,
                                    cfg.negative_ratio, derive_seed(fold_seed, stream));
        };
        std::vector<LabeledPair> train_pairs = labeled(fold.train, 11);
        std::vector<LabeledPair> test_pairs = labeled(fold.test, 13);
        std::vector<LabeledPair> valid_pairs;
        if (!fold.validation.empty()) valid_pairs = labeled(fold.validation, 12);

        FeatureMatrix train_m = assemble_features(train_pairs, cfg.variant, profiles1, profiles2, table,
                                                  cfg.pair_mode, cfg.gj_matching);
        FeatureMatrix test_m = assemble_features(test_pairs, cfg.variant, profiles1, profiles2, table,
                                                 cfg.pair_mode, cfg.gj_matching);
        FeatureMatrix valid_m;
        if (!valid_pairs.empty())
            valid_m = assemble_features(valid_pairs, cfg.variant, profiles1, profiles2, table, cfg.pair_mode,
                                        cfg.gj_matching);
        timings[f].features_s = now_seconds() - t0;

        t0 = now_seconds();
        std::optional<TrainedModel> model;
        if (cfg.classifier == ClassifierKind::rf) {
            RandomForestConfig rf_cfg = cfg.rf;
            rf_cfg.seed = derive_seed(fold_seed, 21);
            model.emplace(RandomForest::train(train_m, rf_cfg), rf_cfg);
        } else {
            MLPConfig mlp_cfg = cfg.mlp;
            mlp_cfg.seed = derive_seed(fold_seed, 22);
            model.emplace(MLPModel::train(train_m, valid_pairs.empty() ? nullptr : &valid_m, mlp_cfg), mlp_cfg);
            fold_json["epochs_run"] = model->epochs_run();
        }
        timings[f].train_s = now_seconds() - t0;

        t0 = now_seconds();
        auto [labels, scores] = model->predict(test_m);
        PRF metrics = prf(test_m.labels, labels);
        timings[f].predict_s = now_seconds() - t0;

        fold_json.update(prf_json(metrics));
        fold_json["train_pairs"] = train_pairs.size();
        fold_json["test_pairs"] = test_pairs.size();

        // Per-type metrics when every test pair's KG1 entity carries a type.
        std::vector<std::string> types;
        types.reserve(test_pairs.size());
        bool all_typed = true;
        for (const LabeledPair& p : test_pairs) {
            std::string t = entity_type_of(bundle.kg1, p.e1);
            if (t.empty()) { all_typed = false; break; }
            types.push_back(std::move(t));
        }
        if (all_typed && !types.empty()) {
            nlohmann::json per_type;
            for (const auto& [type, m] : per_type_prf(test_m.labels, labels, types)) per_type[type] = prf_json(m);
            fold_json["per_type"] = std::move(per_type);
        }

        sum_p += metrics.precision;
        sum_r += metrics.recall;
        sum_f += metrics.f_measure;
        folds_json.push_back(std::move(fold_json));
    }

    nlohmann::json config_echo = cfg.to_json();
    nlohmann::json metrics = {
        {"aggregate",
         {{"precision", sum_p / double(kFoldCount)},
          {"recall", sum_r / double(kFoldCount)},
          {"f_measure", sum_f / double(kFoldCount)}}},
        {"config", config_echo},
        {"config_hash", sha256_hex(config_echo.dump())},
        {"folds", std::move(folds_json)},
        {"seed", cfg.seed},
        {"variant", std::string(to_string(cfg.variant))},
        {"version", version_string()},
    };
    std::string text = metrics.dump(2) + "\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "metrics.json", std::ios::binary);
        if (!out) throw Error::io("cannot write metrics.json in ", out_dir);
        out << text;

        nlohmann::json tj = nlohmann::json::array();
        for (std::size_t f = 0; f < kFoldCount; ++f)
            tj.push_back({{"fold", f + 1},
                          {"embed_s", timings[f].embed_s},
                          {"features_s", timings[f].features_s},
                          {"train_s", timings[f].train_s},
                          {"predict_s", timings[f].predict_s}});
        // Timings live in their own file: wall clock would break the
        // byte-determinism contract of metrics.json.
        std::ofstream tout(fs::path(out_dir) / "timings.json", std::ios::binary);
        tout << nlohmann::json{{"config_hash", sha256_hex(config_echo.dump())},
                               {"folds", std::move(tj)},
                               {"total_s", now_seconds() - t_start}}
                    .dump(2)
             << "\n";
    }
    return text;
}

void convert_tables(const std::vector<TableSpec>& kg1_tables, const std::vector<TableSpec>& kg2_tables,
                    const std::string& links_csv, const std::string& out_dir) {
    if (kg1_tables.empty() || kg2_tables.empty())
        throw Error::invalid("convert needs at least one table per graph");

    KnowledgeGraph kg1, kg2;
    std::string type1, type2;
    auto load_side = [](const std::vector<TableSpec>& tables, KnowledgeGraph& kg, std::string& primary_type) {
        for (const TableSpec& spec : tables) {
            TabularSchema schema = TabularSchema::from_json_file(spec.schema_path);
            if (primary_type.empty()) primary_type = schema.entity_type;
            tabular_to_kg(read_csv(spec.csv_path), schema, kg);
        }
    };
    load_side(kg1_tables, kg1, type1);
    load_side(kg2_tables, kg2, type2);

    CsvTable links = read_csv(links_csv);
    if (links.header.size() != 2)
        throw Error::invalid(links_csv, ": link CSV must have exactly 2 columns, got ", links.header.size());
    AlignmentSet gold(AlignRole::gold);
    auto resolve = [&](const KnowledgeGraph& kg, const std::string& cell, const std::string& primary_type,
                       std::size_t row) {
        const std::string iri = cell.find('/') != std::string::npos ? cell : primary_type + "/" + cell;
        auto id = kg.find_entity(iri);
        if (!id) throw Error::invalid(links_csv, ": row ", row + 2, ": unknown entity '", iri, "'");
        return *id;
    };
    for (std::size_t r = 0; r < links.rows.size(); ++r)
        gold.add({resolve(kg1, links.rows[r][0], type1, r), resolve(kg2, links.rows[r][1], type2, r)});

    write_openea_dataset(out_dir, kg1, kg2, gold);
}

std::string run_ranktest(const std::string& scores_csv, double alpha, const std::string& out_dir) {
    std::vector<std::string> methods, datasets;
    ScoreMatrix scores;
    read_scores_csv(scores_csv, methods, datasets, scores);
    RankReport report = make_rank_report(std::move(methods), std::move(datasets), std::move(scores), alpha);
    std::string text = report.to_json().dump(2) + "\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "rank_report.json", std::ios::binary);
        if (!out) throw Error::io("cannot write rank_report.json in ", out_dir);
        out << text;
        write_cd_diagram(report, (fs::path(out_dir) / "cd_diagram.svg").string());
    }
    return text;
}

}  // namespace eager
