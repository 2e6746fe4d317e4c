// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
//
// Command-line front end. All functionality lives in the shared library; this
// file only parses arguments and forwards to the C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eager/eager.h"

namespace {

int finish(eager_status status, char* err) {
    if (status != EAGER_OK) {
        std::fprintf(stderr, "error: %s\n", err ? err : "unknown failure");
        eager_string_free(err);
    }
    return int(status);
}

void print_and_free(char* text) {
    if (!text) return;
    std::fputs(text, stdout);
    if (text[0] && text[std::string(text).size() - 1] != '\n') std::fputc('\n', stdout);
    eager_string_free(text);
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eager: entity resolution for knowledge graphs via attribute similarities, graph embeddings "
                 "and supervised classifiers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(eager_version()));

    // convert
    auto* convert = app.add_subcommand("convert", "Convert tabular CSVs into an OpenEA-layout dataset");
    std::vector<std::string> kg1_csv, kg1_schema, kg2_csv, kg2_schema;
    std::string links, out_dir;
    convert->add_option("--kg1", kg1_csv, "CSV table(s) of the first graph")->required();
    convert->add_option("--schema1", kg1_schema, "schema JSON per --kg1 table")->required();
    convert->add_option("--kg2", kg2_csv, "CSV table(s) of the second graph")->required();
    convert->add_option("--schema2", kg2_schema, "schema JSON per --kg2 table")->required();
    convert->add_option("--links", links, "two-column CSV of matching entity ids")->required();
    convert->add_option("--out", out_dir, "output dataset directory")->required();

    // split
    auto* split = app.add_subcommand("split", "Generate the 5-fold 7-2-1 split for a dataset");
    std::string data_dir;
    uint64_t seed = 0;
    bool force = false;
    split->add_option("--data", data_dir, "dataset directory")->required();
    split->add_option("--seed", seed, "split seed");
    split->add_flag("--force", force, "replace an existing split");

    // embed
    auto* embed = app.add_subcommand("embed", "Train embeddings on the merged graph of one fold");
    int fold = 1, hits_k = 0;
    std::string config_path, emb_out;
    embed->add_option("--data", data_dir, "dataset directory")->required();
    embed->add_option("--fold", fold, "fold whose train links fuse the graphs (1..5)");
    embed->add_option("--config", config_path, "TransE config JSON file");
    embed->add_option("--seed", seed, "dataset seed (used when folds are generated)");
    embed->add_option("--out", emb_out, "output embedding file")->required();
    embed->add_option("--hits", hits_k, "also report hits@k on the fold's test links");

    // featurize
    auto* featurize = app.add_subcommand("featurize", "Write a labeled feature CSV for one fold and split");
    std::string split_name = "train", variant = "AE", pair_mode = "concat", emb_path, feat_out;
    double negative_ratio = 1.0;
    featurize->add_option("--data", data_dir, "dataset directory")->required();
    featurize->add_option("--fold", fold, "fold (1..5)");
    featurize->add_option("--split", split_name, "train, validation or test");
    featurize->add_option("--variant", variant, "A, E or AE");
    featurize->add_option("--mode", pair_mode, "embedding pair mode: concat, diff or hadamard");
    featurize->add_option("--embeddings", emb_path, "embedding file (required for E/AE)");
    featurize->add_option("--negative-ratio", negative_ratio, "negatives per positive");
    featurize->add_option("--seed", seed, "sampling seed");
    featurize->add_option("--out", feat_out, "output CSV")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a classifier from a feature CSV");
    std::string features_csv, validation_csv, classifier = "rf", model_out;
    train->add_option("--features", features_csv, "training feature CSV")->required();
    train->add_option("--validation", validation_csv, "validation feature CSV (MLP early stopping)");
    train->add_option("--classifier", classifier, "rf or mlp");
    train->add_option("--config", config_path, "classifier config JSON file");
    train->add_option("--seed", seed, "training seed");
    train->add_option("--out", model_out, "output model file")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "Score a feature CSV with a trained model");
    std::string model_path, pred_out;
    predict->add_option("--model", model_path, "model file")->required();
    predict->add_option("--features", features_csv, "feature CSV")->required();
    predict->add_option("--out", pred_out, "output label,score CSV");

    // run
    auto* run = app.add_subcommand("run", "Run the full 5-fold experiment from a config file");
    bool seed_given = false;
    run->add_option("--config", config_path, "run config JSON")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the config seed");

    // ranktest
    auto* ranktest = app.add_subcommand("ranktest", "Average ranks, Friedman test and CD diagram");
    std::string scores_csv;
    double alpha = 0.05;
    ranktest->add_option("--scores", scores_csv, "score matrix CSV (dataset,<method...>)")->required();
    ranktest->add_option("--alpha", alpha, "significance level (0.05 or 0.10)")
        ->check(CLI::IsMember({0.05, 0.10}));
    ranktest->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    seed_given = seed_opt->count() > 0;

    char* err = nullptr;

    if (convert->parsed()) {
        if (kg1_csv.size() != kg1_schema.size() || kg2_csv.size() != kg2_schema.size()) {
            std::fprintf(stderr, "error: each --kg table needs a matching --schema\n");
            return 2;
        }
        std::string spec = "{\"kg1\":[";
        for (std::size_t i = 0; i < kg1_csv.size(); ++i)
            spec += std::string(i ? "," : "") + "{\"csv\":\"" + json_escape(kg1_csv[i]) + "\",\"schema\":\"" +
                    json_escape(kg1_schema[i]) + "\"}";
        spec += "],\"kg2\":[";
        for (std::size_t i = 0; i < kg2_csv.size(); ++i)
            spec += std::string(i ? "," : "") + "{\"csv\":\"" + json_escape(kg2_csv[i]) + "\",\"schema\":\"" +
                    json_escape(kg2_schema[i]) + "\"}";
        spec += "],\"links\":\"" + json_escape(links) + "\"}";
        eager_status st = eager_convert(spec.c_str(), out_dir.c_str(), &err);
        return finish(st, err);
    }

    if (split->parsed()) {
        eager_status st = eager_dataset_write_folds(data_dir.c_str(), seed, force ? 1 : 0, &err);
        return finish(st, err);
    }

    if (embed->parsed()) {
        eager_dataset* ds = nullptr;
        eager_status st = eager_dataset_load(data_dir.c_str(), seed, &ds, &err);
        if (st != EAGER_OK) return finish(st, err);
        std::string transe_json = "{}";
        if (!config_path.empty()) {
            FILE* f = std::fopen(config_path.c_str(), "rb");
            if (!f) {
                std::fprintf(stderr, "error: cannot open %s\n", config_path.c_str());
                eager_dataset_free(ds);
                return 2;
            }
            transe_json.clear();
            char buf[4096];
            std::size_t n;
            while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) transe_json.append(buf, n);
            std::fclose(f);
        }
        eager_embeddings* emb = nullptr;
        char* summary = nullptr;
        st = eager_embeddings_train(ds, fold, transe_json.c_str(), &emb, &summary, &err);
        if (st == EAGER_OK) {
            print_and_free(summary);
            st = eager_embeddings_save(ds, emb, emb_out.c_str(), &err);
        }
        if (st == EAGER_OK && hits_k > 0) {
            double hits = 0.0;
            st = eager_embeddings_hits(ds, emb, fold, hits_k, &hits, &err);
            if (st == EAGER_OK) std::printf("hits@%d: %.4f\n", hits_k, hits);
        }
        eager_embeddings_free(emb);
        eager_dataset_free(ds);
        return finish(st, err);
    }

    if (featurize->parsed()) {
        eager_dataset* ds = nullptr;
        eager_status st = eager_dataset_load(data_dir.c_str(), seed, &ds, &err);
        if (st != EAGER_OK) return finish(st, err);
        eager_embeddings* emb = nullptr;
        if (!emb_path.empty()) {
            st = eager_embeddings_load(ds, emb_path.c_str(), &emb, &err);
            if (st != EAGER_OK) {
                eager_dataset_free(ds);
                return finish(st, err);
            }
        }
        st = eager_featurize(ds, fold, split_name.c_str(), variant.c_str(), pair_mode.c_str(), emb,
                             negative_ratio, seed, feat_out.c_str(), &err);
        eager_embeddings_free(emb);
        eager_dataset_free(ds);
        return finish(st, err);
    }

    if (train->parsed()) {
        std::string cfg_json = "{\"kind\":\"" + classifier + "\",\"seed\":" + std::to_string(seed) + "}";
        if (!config_path.empty()) {
            FILE* f = std::fopen(config_path.c_str(), "rb");
            if (!f) {
                std::fprintf(stderr, "error: cannot open %s\n", config_path.c_str());
                return 2;
            }
            cfg_json.clear();
            char buf[4096];
            std::size_t n;
            while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) cfg_json.append(buf, n);
            std::fclose(f);
        }
        eager_model* model = nullptr;
        eager_status st = eager_train(features_csv.c_str(),
                                      validation_csv.empty() ? nullptr : validation_csv.c_str(),
                                      cfg_json.c_str(), &model, &err);
        if (st == EAGER_OK) st = eager_model_save(model, model_out.c_str(), &err);
        eager_model_free(model);
        return finish(st, err);
    }

    if (predict->parsed()) {
        eager_model* model = nullptr;
        eager_status st = eager_model_load(model_path.c_str(), &model, &err);
        if (st != EAGER_OK) return finish(st, err);
        char* metrics = nullptr;
        st = eager_predict(model, features_csv.c_str(), pred_out.empty() ? nullptr : pred_out.c_str(),
                           &metrics, &err);
        if (st == EAGER_OK) print_and_free(metrics);
        eager_model_free(model);
        return finish(st, err);
    }

    if (run->parsed()) {
        char* metrics = nullptr;
        eager_status st = eager_run(config_path.c_str(), out_dir.c_str(), seed, seed_given ? 1 : 0,
                                    &metrics, &err);
        if (st == EAGER_OK) print_and_free(metrics);
        return finish(st, err);
    }

    if (ranktest->parsed()) {
        char* report = nullptr;
        eager_status st = eager_ranktest(scores_csv.c_str(), alpha, out_dir.c_str(), &report, &err);
        if (st == EAGER_OK) print_and_free(report);
        return finish(st, err);
    }

    return 2;
}
