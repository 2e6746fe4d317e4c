// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
//
// Acceptance suite: one line per criterion, nonzero exit when any gating
// criterion fails. Criteria pin the published statistics, the similarity and
// classifier oracles, the embedding sanity fixture and the end-to-end
// synthetic run, each with its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "dataset.hpp"
#include "eager/eager.h"
#include "embedding.hpp"
#include "evaluation.hpp"
#include "ingest.hpp"
#include "mlp.hpp"
#include "model.hpp"
#include "pipeline.hpp"
#include "rf.hpp"
#include "rng.hpp"
#include "strsim.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"
#include "unicode.hpp"

using namespace eager;
namespace et = eager::testing;

#ifndef EAGER_GOLDEN_DIR
#define EAGER_GOLDEN_DIR "data/golden"
#endif

namespace {

int g_failures = 0;

struct Criterion {
    std::string name;
    std::vector<std::string> problems;
    std::vector<std::string> notes;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit Criterion(std::string n) : name(std::move(n)) {}

    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }

    void note(const std::string& what) { notes.push_back(what); }

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    void finish(double budget_s) {
        const double elapsed = seconds();
        if (elapsed > budget_s)
            problems.push_back(Error::cat("runtime ", elapsed, "s exceeds budget ", budget_s, "s"));
        if (problems.empty()) {
            std::printf("PASS  %s (%.2fs)\n", name.c_str(), elapsed);
            for (const std::string& n : notes) std::printf("      %s\n", n.c_str());
        } else {
            ++g_failures;
            std::printf("FAIL  %s (%.2fs)\n", name.c_str(), elapsed);
            for (const std::string& p : problems) std::printf("      - %s\n", p.c_str());
        }
        std::fflush(stdout);
    }
};

struct GoldenTable {
    std::string file;
    std::vector<double> published_ranks;
    double rank_tolerance;
    double paper_p;
    // The shallow variants table is asserted against the spec's operational
    // bound: the published p was computed on unrounded fold data, and the
    // 3-decimal matrix cannot reproduce its magnitude.
    double p_ceiling;  // 0 = use the order-of-magnitude band around paper_p
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void criterion_statistics() {
    Criterion c("criterion 1: published rank rows, rank sums and Friedman p-values");
    const std::vector<GoldenTable> tables = {
        {"shallow_variants_fmeasure.csv",
         {7.786, 4.143, 2.929, 3.429, 6.643, 5.571, 2.786, 2.714, 11.929, 11.857, 11.714, 9.714, 12.214,
          11.571},
         0.6, 1.60e-13, 1e-10},
        {"rich_variants_fmeasure.csv",
         {5.938, 11.094, 1.344, 3.000, 6.812, 5.375, 7.688, 8.281, 8.625, 12.625, 6.125, 5.656, 11.969,
          10.469},
         0.6, 2.80e-20, 0},
        {"frameworks_shallow_fmeasure.csv", {3.286, 3.786, 4.000, 2.500, 1.429}, 0.3, 0.012, 0},
        {"frameworks_rich_fmeasure.csv", {1.125, 2.312, 2.688, 3.938, 4.938}, 0.6, 2.21e-11, 0},
    };
    for (const GoldenTable& table : tables) {
        std::vector<std::string> methods, datasets;
        ScoreMatrix scores;
        read_scores_csv(std::string(EAGER_GOLDEN_DIR) + "/" + table.file, methods, datasets, scores);
        std::vector<double> ranks = average_ranks(scores);
        double sum = 0.0;
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            sum += ranks[i];
            c.expect(std::abs(ranks[i] - table.published_ranks[i]) <= table.rank_tolerance,
                     table.file + ": rank[" + std::to_string(i) + "] = " + fmt(ranks[i]) + " vs published " +
                         fmt(table.published_ranks[i]) + " (tol " + fmt(table.rank_tolerance) + ")");
        }
        const double expected_sum = double(scores.n_cols * (scores.n_cols + 1)) / 2.0;
        c.expect(std::abs(sum - expected_sum) < 1e-9,
                 table.file + ": rank sum " + fmt(sum) + " != k(k+1)/2 = " + fmt(expected_sum));

        const double p = friedman_test(scores).p;
        c.note(table.file + ": friedman p = " + fmt(p) + " (published " + fmt(table.paper_p) + ")");
        if (table.p_ceiling > 0) {
            c.expect(p <= table.p_ceiling,
                     table.file + ": p = " + fmt(p) + " above ceiling " + fmt(table.p_ceiling));
        } else {
            const double ratio = std::log10(p / table.paper_p);
            c.expect(std::abs(ratio) <= 1.0, table.file + ": p = " + fmt(p) + " not within one order of " +
                                                 fmt(table.paper_p));
        }
    }
    c.finish(1.0);
}

void criterion_cd_semantics() {
    Criterion c("criterion 2: CD grouping on the framework comparison (alpha = 0.05)");
    std::vector<std::string> methods, datasets;
    ScoreMatrix scores;
    read_scores_csv(std::string(EAGER_GOLDEN_DIR) + "/frameworks_shallow_fmeasure.csv", methods, datasets,
                    scores);
    RankReport report = make_rank_report(methods, datasets, scores, 0.05);

    std::size_t best = 0;
    for (std::size_t i = 1; i < report.avg_ranks.size(); ++i)
        if (report.avg_ranks[i] < report.avg_ranks[best]) best = i;
    c.expect(report.methods[best] == "Magellan-RF", "best-ranked method is " + report.methods[best]);

    std::vector<std::string> separated;
    for (std::size_t i = 0; i < report.avg_ranks.size(); ++i)
        if (i != best && report.avg_ranks[i] - report.avg_ranks[best] >= report.cd)
            separated.push_back(report.methods[i]);
    c.expect(separated.size() == 2, "expected exactly 2 methods beyond CD, got " +
                                        std::to_string(separated.size()));
    bool dm = false, rf = false;
    for (const std::string& m : separated) {
        dm |= m == "DeepMatcher";
        rf |= m == "EAGER-RF";
    }
    c.expect(dm && rf, "separated set must be {DeepMatcher, EAGER-RF}");
    c.note("CD = " + fmt(report.cd) + "; separated: DeepMatcher (gap " +
           fmt(report.avg_ranks[2] - report.avg_ranks[best]) + "), EAGER-RF (gap " +
           fmt(report.avg_ranks[1] - report.avg_ranks[best]) + ")");
    c.finish(1.0);
}

void criterion_similarity_oracles() {
    Criterion c("criterion 3: 10^4 random pairs match the similarity oracles exactly");
    Rng rng(0xACCE55);
    auto random_string = [&](std::size_t max_len) {
        std::size_t len = rng.index(max_len + 1);
        std::string s;
        for (std::size_t i = 0; i < len; ++i) s.push_back(char('a' + rng.index(6)));
        return s;
    };
    std::size_t lev_bad = 0, dice_bad = 0, gj_bad = 0, prop_bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::string a = random_string(12), b = random_string(12);
        if (levenshtein_sim(a, b) != et::lev_sim_oracle(a, b)) ++lev_bad;
        if (trigram_dice_sim(a, b) != et::trigram_dice_oracle(a, b)) ++dice_bad;
        if (generalized_jaccard_sim(a, b) != et::gj_oracle(a, b)) ++gj_bad;
        const bool symmetric = levenshtein_sim(a, b) == levenshtein_sim(b, a) &&
                               trigram_dice_sim(a, b) == trigram_dice_sim(b, a) &&
                               generalized_jaccard_sim(a, b) == generalized_jaccard_sim(b, a);
        const bool identity = levenshtein_sim(a, a) == 1.0 && trigram_dice_sim(a, a) == 1.0 &&
                              generalized_jaccard_sim(a, a) == 1.0;
        if (!symmetric || !identity) ++prop_bad;
    }
    c.expect(lev_bad == 0, std::to_string(lev_bad) + " Levenshtein mismatches");
    c.expect(dice_bad == 0, std::to_string(dice_bad) + " trigram Dice mismatches");
    c.expect(gj_bad == 0, std::to_string(gj_bad) + " generalized Jaccard mismatches");
    c.expect(prop_bad == 0, std::to_string(prop_bad) + " symmetry/identity violations");
    c.finish(30.0);
}

void criterion_classifiers() {
    Criterion c("criterion 4: gradient check, Adam oracle, forest memorization, determinism");

    // MLP gradient check on a random probe.
    Rng rng(0xC1A55);
    FeatureMatrix probe;
    probe.feature_dim = 4;
    probe.row_count = 4;
    for (int i = 0; i < 16; ++i) probe.values.push_back(rng.uniform(-1, 1));
    probe.labels = {1, 0, 0, 1};
    MLPConfig gc_cfg;
    gc_cfg.hidden_sizes = {200, 20};
    gc_cfg.seed = 17;
    const double max_rel = MLPModel::gradient_check(gc_cfg, probe);
    c.expect(max_rel < 1e-4, "gradient check max relative error " + fmt(max_rel));
    c.note("gradient check max relative error = " + fmt(max_rel));

    // Adam against a scalar reimplementation.
    {
        std::vector<double> params = {0.25, -0.75};
        Adam adam(2, 0.002, 0.9, 0.999, 1e-8);
        double p0 = 0.25, p1 = -0.75, m0 = 0, m1 = 0, v0 = 0, v1 = 0;
        double worst = 0.0;
        for (int t = 1; t <= 50; ++t) {
            const double g0 = std::sin(0.7 * t), g1 = std::cos(1.3 * t);
            adam.step(params, std::vector<double>{g0, g1});
            m0 = 0.9 * m0 + 0.1 * g0;
            v0 = 0.999 * v0 + 0.001 * g0 * g0;
            m1 = 0.9 * m1 + 0.1 * g1;
            v1 = 0.999 * v1 + 0.001 * g1 * g1;
            const double c1 = 1 - std::pow(0.9, t), c2 = 1 - std::pow(0.999, t);
            p0 -= 0.002 * (m0 / c1) / (std::sqrt(v0 / c2) + 1e-8);
            p1 -= 0.002 * (m1 / c1) / (std::sqrt(v1 / c2) + 1e-8);
            worst = std::max({worst, std::abs(params[0] - p0), std::abs(params[1] - p1)});
        }
        c.expect(worst < 1e-12, "Adam deviates from the scalar oracle by " + fmt(worst));
    }

    // 200-row consistent set; forest grown to purity memorizes it.
    {
        FeatureMatrix data;
        data.feature_dim = 3;
        data.row_count = 200;
        Rng drng(0xDA7A);
        for (std::size_t i = 0; i < 200; ++i) {
            const int label = int(i % 2);
            data.labels.push_back(label);
            for (int f = 0; f < 3; ++f) data.values.push_back(drng.uniform(0, 1) + (label ? 0.6 : 0.0));
        }
        RandomForestConfig cfg;
        cfg.n_trees = 250;
        cfg.seed = 5;
        RandomForest forest = RandomForest::train(data, cfg);
        std::vector<double> scores = forest.scores(data);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < data.row_count; ++i)
            correct += std::size_t((scores[i] >= 0.5 ? 1 : 0) == data.labels[i]);
        c.expect(correct == data.row_count,
                 "forest training accuracy " + fmt(double(correct) / 200.0) + " != 1.0");

        RandomForest again = RandomForest::train(data, cfg);
        c.expect(again.scores(data) == scores, "forest predictions differ across identical seeds");

        MLPConfig mcfg;
        mcfg.hidden_sizes = {16, 4};
        mcfg.alpha = 1e-3;
        mcfg.max_epochs = 20;
        mcfg.seed = 6;
        MLPModel m1 = MLPModel::train(data, nullptr, mcfg);
        MLPModel m2 = MLPModel::train(data, nullptr, mcfg);
        c.expect(m1.parameters() == m2.parameters(), "MLP weights differ across identical seeds");
    }
    c.finish(60.0);
}

void criterion_end_to_end() {
    Criterion c("criterion 5: synthetic 500-entity run, AE with both classifiers, AE >= E");
    setenv("EAGER_THREADS", "1", 1);  // the runtime budget assumes single-threaded execution
    et::TempDir dir;
    et::SyntheticSpec spec;  // 500 entities, typo probability 0.1, 30% relations dropped
    spec.seed = 2026;
    et::write_synthetic_dataset(dir.str("ds"), spec);

    nlohmann::json embedding = {{"source", "train"}, {"dim", 16},          {"epochs", 60},
                                {"learning_rate", 0.05}, {"margin", 1.0}, {"negatives", 1},
                                {"norm", "L2"}};
    auto config_for = [&](const std::string& variant, const std::string& clf) {
        nlohmann::json j = {
            {"dataset_dir", dir.str("ds")},
            {"variant", variant},
            {"pair_mode", "concat"},
            {"embedding", embedding},
            {"seed", 77},
        };
        if (clf == "rf") {
            j["classifier"] = {{"kind", "rf"}, {"rf", {{"n_trees", 120}}}};
        } else {
            j["classifier"] = {
                {"kind", "mlp"},
                {"mlp", {{"alpha", 1e-3}, {"max_epochs", 500}, {"batch_size", 8}, {"patience", 0}}}};
        }
        return j;
    };

    auto run_one = [&](const std::string& variant, const std::string& clf, const std::string& tag) {
        const std::string cfg_path = dir.str("cfg_" + tag + ".json");
        et::write_file(cfg_path, config_for(variant, clf).dump(2));
        char* err = nullptr;
        char* metrics_text = nullptr;
        eager_status st =
            eager_run(cfg_path.c_str(), dir.str("out_" + tag).c_str(), 0, 0, &metrics_text, &err);
        double f = -1.0;
        if (st == EAGER_OK) {
            f = nlohmann::json::parse(metrics_text).at("aggregate").at("f_measure").get<double>();
        } else {
            c.expect(false, tag + ": run failed: " + (err ? err : "?"));
        }
        eager_string_free(metrics_text);
        eager_string_free(err);
        return f;
    };

    const double f_ae_rf = run_one("AE", "rf", "ae_rf");
    const double f_ae_mlp = run_one("AE", "mlp", "ae_mlp");
    const double f_e_rf = run_one("E", "rf", "e_rf");

    c.expect(f_ae_rf >= 0.95, "AE + random forest aggregate F = " + fmt(f_ae_rf) + " < 0.95");
    c.expect(f_ae_mlp >= 0.95, "AE + MLP aggregate F = " + fmt(f_ae_mlp) + " < 0.95");
    c.expect(f_ae_rf >= f_e_rf, "AE (" + fmt(f_ae_rf) + ") must not trail E (" + fmt(f_e_rf) + ")");
    c.note("aggregate F: AE+RF = " + fmt(f_ae_rf) + ", AE+MLP = " + fmt(f_ae_mlp) + ", E+RF = " +
           fmt(f_e_rf));
    unsetenv("EAGER_THREADS");
    c.finish(300.0);
}

void criterion_embedding_sanity() {
    Criterion c("criterion 6: fused-cycle fixture: loss halves, unit norms, hits@1 >= 0.8");
    auto cp = et::make_cycle_pair(24);
    MergedGraph merged = merge_graphs(cp.kg1, cp.kg2, cp.seed);
    TransEConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 300;
    cfg.learning_rate = 0.05;
    cfg.seed = 31;
    TransEResult r = train_transe(merged, cp.kg1, cp.kg2, cfg);

    c.expect(r.final_mean_loss <= 0.5 * r.initial_mean_loss,
             "loss only fell from " + fmt(r.initial_mean_loss) + " to " + fmt(r.final_mean_loss));
    c.expect(r.max_norm_deviation <= 1e-6, "norm deviation " + fmt(r.max_norm_deviation));
    bool finite = true;
    for (double l : r.epoch_mean_loss) finite &= std::isfinite(l);
    c.expect(finite, "non-finite epoch loss");
    const double hits = nn_hits(r.table, cp.heldout, 1);
    c.expect(hits >= 0.8, "hits@1 = " + fmt(hits));
    c.note("mean loss " + fmt(r.initial_mean_loss) + " -> " + fmt(r.final_mean_loss) + "; hits@1 = " +
           fmt(hits));
    c.finish(60.0);
}

// Non-gating: runs only when a benchmark directory is supplied.
void optional_benchmark() {
    const char* dir = std::getenv("EAGER_BENCH_DBLP_ACM");
    if (!dir || !*dir) {
        std::printf("SKIP  optional benchmark (set EAGER_BENCH_DBLP_ACM to an OpenEA-layout directory)\n");
        return;
    }
    try {
        RunConfig cfg;
        cfg.dataset_dir = dir;
        cfg.variant = Variant::A;
        cfg.classifier = ClassifierKind::rf;
        cfg.seed = 1;
        nlohmann::json metrics = nlohmann::json::parse(run_experiment(cfg, ""));
        const double f = metrics.at("aggregate").at("f_measure").get<double>();
        std::printf("%s  optional benchmark: attribute variant + RF aggregate F = %.4f (target 0.98)\n",
                    f >= 0.98 ? "PASS" : "INFO", f);
    } catch (const std::exception& e) {
        std::printf("INFO  optional benchmark failed to run: %s\n", e.what());
    }
}

}  // namespace

int main() {
    criterion_statistics();
    criterion_cd_semantics();
    criterion_similarity_oracles();
    criterion_classifiers();
    criterion_end_to_end();
    criterion_embedding_sanity();
    optional_benchmark();
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
