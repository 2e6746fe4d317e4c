// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "common.hpp"
#include "embedding.hpp"
#include "rng.hpp"
#include "support/fixtures.hpp"
#include "support/testutil.hpp"

using namespace eager;
namespace et = eager::testing;

namespace {

double norm_of(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("merge with an empty seed is a disjoint union") {
    auto cp = et::make_cycle_pair(6);
    AlignmentSet empty(AlignRole::train);
    MergedGraph m = merge_graphs(cp.kg1, cp.kg2, empty);
    CHECK(m.entity_count == 12);
    CHECK(m.relation_count == 2);
    CHECK(m.triples.size() == 12);
}

TEST_CASE("each seed pair collapses one node") {
    auto cp = et::make_cycle_pair(6);
    AlignmentSet one(AlignRole::train);
    one.add(cp.seed.pairs()[0]);
    MergedGraph m = merge_graphs(cp.kg1, cp.kg2, one);
    CHECK(m.entity_count == 11);
}

TEST_CASE("transitive seed chains collapse to components") {
    // a0-b0 and a1-b0 chain a0, a1 and b0 into one node.
    KnowledgeGraph kg1, kg2;
    EntityId a0 = kg1.intern_entity("a0"), a1 = kg1.intern_entity("a1");
    kg1.add_rel_triple("a0", "r", "a1");
    EntityId b0 = kg2.intern_entity("b0");
    kg2.intern_entity("b1");
    kg2.add_rel_triple("b0", "r", "b1");
    AlignmentSet seed(AlignRole::train);
    seed.add({a0, b0});
    seed.add({a1, b0});
    MergedGraph m = merge_graphs(kg1, kg2, seed);
    CHECK(m.entity_count == 2);  // {a0,a1,b0} and {b1}
    CHECK(m.kg1_to_merged[a0] == m.kg1_to_merged[a1]);
    CHECK(m.kg1_to_merged[a0] == m.kg2_to_merged[b0]);

    SUBCASE("missing seed entities are rejected") {
        AlignmentSet bad(AlignRole::train);
        bad.add({EntityId(99), b0});
        CHECK_THROWS_AS(merge_graphs(kg1, kg2, bad), Error);
    }
}

TEST_CASE("merge agrees with a connected-components oracle on random seeds") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n1 = 10 + rng.index(20), n2 = 10 + rng.index(20);
        KnowledgeGraph kg1, kg2;
        for (std::size_t i = 0; i < n1; ++i) kg1.intern_entity("a" + std::to_string(i));
        for (std::size_t i = 0; i < n2; ++i) kg2.intern_entity("b" + std::to_string(i));
        kg1.add_rel_triple("a0", "r", "a1");
        kg2.add_rel_triple("b0", "r", "b1");

        AlignmentSet seed(AlignRole::train);
        const std::size_t n_seeds = rng.index(15);
        for (std::size_t s = 0; s < n_seeds; ++s)
            seed.add({EntityId(rng.index(n1)), EntityId(rng.index(n2))});

        MergedGraph m = merge_graphs(kg1, kg2, seed);

        // Oracle: label propagation to a fixed point.
        std::vector<int> label(n1 + n2);
        std::iota(label.begin(), label.end(), 0);
        bool changed = true;
        while (changed) {
            changed = false;
            for (const AlignmentPair& p : seed.pairs()) {
                int& l1 = label[p.e1];
                int& l2 = label[n1 + p.e2];
                if (l1 != l2) {
                    l1 = l2 = std::min(l1, l2);
                    changed = true;
                }
            }
        }
        std::map<int, std::size_t> components;
        for (int l : label) components.emplace(l, components.size());
        CHECK(m.entity_count == components.size());
        // same merged id exactly when the oracle labels agree
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j)
                CHECK((m.kg1_to_merged[i] == m.kg2_to_merged[j]) == (label[i] == label[n1 + j]));
    }
}

TEST_CASE("merge maps preserve the original entity sets") {
    auto cp = et::make_cycle_pair(8);
    MergedGraph m = merge_graphs(cp.kg1, cp.kg2, cp.seed);
    CHECK(m.kg1_to_merged.size() == cp.kg1.entity_count());
    CHECK(m.kg2_to_merged.size() == cp.kg2.entity_count());
    for (uint32_t id : m.kg1_to_merged) CHECK(id < m.entity_count);
    for (uint32_t id : m.kg2_to_merged) CHECK(id < m.entity_count);
}

TEST_CASE("training requires relational structure") {
    KnowledgeGraph kg1, kg2;
    kg1.add_attr_triple("a", "p", "v");
    kg2.add_attr_triple("b", "p", "v");
    AlignmentSet seed(AlignRole::train);
    MergedGraph m = merge_graphs(kg1, kg2, seed);
    TransEConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 1;
    CHECK_THROWS_AS(train_transe(m, kg1, kg2, cfg), Error);
}

TEST_CASE("init-only training yields unit-norm vectors") {
    auto cp = et::make_cycle_pair(8);
    MergedGraph m = merge_graphs(cp.kg1, cp.kg2, cp.seed);
    TransEConfig cfg;
    cfg.dim = 6;
    cfg.epochs = 0;
    cfg.seed = 3;
    TransEResult r = train_transe(m, cp.kg1, cp.kg2, cfg);
    CHECK(r.table.dim() == 6);
    for (std::size_t e = 0; e < cp.kg1.entity_count(); ++e)
        CHECK(norm_of(r.table.vec({1, EntityId(e)})) == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t e = 0; e < cp.kg2.entity_count(); ++e)
        CHECK(norm_of(r.table.vec({2, EntityId(e)})) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
    auto cp = et::make_cycle_pair(10);
    MergedGraph m = merge_graphs(cp.kg1, cp.kg2, cp.seed);
    TransEConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 20;
    cfg.seed = 555;
    TransEResult r1 = train_transe(m, cp.kg1, cp.kg2, cfg);
    TransEResult r2 = train_transe(m, cp.kg1, cp.kg2, cfg);
    for (std::size_t e = 0; e < cp.kg1.entity_count(); ++e) {
        auto v1 = r1.table.vec({1, EntityId(e)});
        auto v2 = r2.table.vec({1, EntityId(e)});
        for (int i = 0; i < cfg.dim; ++i) CHECK(v1[i] == v2[i]);
    }
    CHECK(r1.epoch_mean_loss == r2.epoch_mean_loss);
}

TEST_CASE("margin-loss gradients match central differences") {
    Rng rng(77);
    for (TransEConfig::Norm norm : {TransEConfig::Norm::L2, TransEConfig::Norm::L1}) {
        const int dim = 5;
        const double margin = 5.0;  // large margin keeps the hinge active (away from the kink)
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> params(5 * dim);
            for (double& p : params) p = rng.uniform(-1.0, 1.0) + (p >= 0 ? 0.15 : -0.15);
            if (transe_pair_loss(params, dim, margin, norm) <= 1e-3) continue;
            std::vector<double> analytic(params.size());
            transe_pair_grad(params, dim, margin, norm, analytic);
            const double h = 1e-6;
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double saved = params[i];
                params[i] = saved + h;
                const double up = transe_pair_loss(params, dim, margin, norm);
                params[i] = saved - h;
                const double down = transe_pair_loss(params, dim, margin, norm);
                params[i] = saved;
                const double numeric = (up - down) / (2 * h);
                const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1.0});
                CHECK(std::abs(analytic[i] - numeric) / denom < 1e-4);
            }
        }
    }
}

TEST_CASE("two fused 3-cycles reduce the training loss") {
    auto cp = et::make_cycle_pair(3);
    MergedGraph m = merge_graphs(cp.kg1, cp.kg2, cp.seed);
    TransEConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 200;
    cfg.learning_rate = 0.05;
    cfg.seed = 12;
    TransEResult r = train_transe(m, cp.kg1, cp.kg2, cfg);
    // With 6 triples a single evaluation pass is too noisy to threshold on;
    // average the trailing epochs instead. On a 4-node merged graph a
    // sizable share of uniform corruptions lands on the geometrically
    // equivalent held-out counterpart and keeps the hinge at the margin, so
    // the loss floor stays well above zero; the 50% reduction claim is
    // asserted on the longer cycles below.
    double tail = 0.0;
    const std::size_t tail_n = 20;
    for (std::size_t e = r.epoch_mean_loss.size() - tail_n; e < r.epoch_mean_loss.size(); ++e)
        tail += r.epoch_mean_loss[e];
    tail /= double(tail_n);
    CHECK(tail < r.initial_mean_loss);
    CHECK(tail <= 0.75 * r.initial_mean_loss);
}

TEST_CASE("cycle fixture trains: loss drops and counterparts meet") {
    auto cp = et::make_cycle_pair(24);
    MergedGraph m = merge_graphs(cp.kg1, cp.kg2, cp.seed);
    TransEConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 300;
    cfg.learning_rate = 0.05;
    cfg.seed = 5;
    TransEResult r = train_transe(m, cp.kg1, cp.kg2, cfg);

    CHECK(r.initial_mean_loss > 0.0);
    CHECK(r.final_mean_loss < 0.5 * r.initial_mean_loss);
    CHECK(r.max_norm_deviation <= 1e-6);
    for (double l : r.epoch_mean_loss) CHECK(std::isfinite(l));

    CHECK(nn_hits(r.table, cp.heldout, 1) >= 0.8);
}

TEST_CASE("embedding file I/O") {
    KnowledgeGraph kg1, kg2;
    kg1.intern_entity("x1");
    kg1.intern_entity("x2");
    kg2.intern_entity("y1");
    et::TempDir dir;

    SUBCASE("a complete file loads") {
        et::write_file(dir.str("emb"),
                       "dim=4\n1\tx1\t0.1 0.2 0.3 0.4\n1\tx2\t1 2 3 4\n2\ty1\t-1 -2 -3 -4\n");
        EmbeddingTable t = load_embeddings(dir.str("emb"), kg1, kg2);
        CHECK(t.dim() == 4);
        CHECK(t.vec({1, 0})[1] == 0.2);
        CHECK(t.vec({2, 0})[3] == -4.0);
    }

    SUBCASE("dimension mismatches name the line") {
        et::write_file(dir.str("emb"), "dim=4\n1\tx1\t0.1 0.2 0.3\n1\tx2\t1 2 3 4\n2\ty1\t1 2 3 4\n");
        try {
            load_embeddings(dir.str("emb"), kg1, kg2);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find(":2:") != std::string::npos);
        }
    }

    SUBCASE("missing entities are named") {
        et::write_file(dir.str("emb"), "dim=2\n1\tx1\t1 2\n2\ty1\t3 4\n");
        try {
            load_embeddings(dir.str("emb"), kg1, kg2);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("x2") != std::string::npos);
        }
    }

    SUBCASE("unknown entities are rejected") {
        et::write_file(dir.str("emb"), "dim=2\n1\tx1\t1 2\n1\tx2\t1 2\n1\tghost\t9 9\n2\ty1\t3 4\n");
        CHECK_THROWS_AS(load_embeddings(dir.str("emb"), kg1, kg2), Error);
    }

    SUBCASE("save/load round-trips bit-exactly") {
        EmbeddingTable t(3, 2, 1);
        Rng rng(8);
        for (int kg = 1; kg <= 2; ++kg)
            for (std::size_t e = 0; e < (kg == 1 ? 2u : 1u); ++e) {
                auto v = t.mut({kg, EntityId(e)});
                for (double& x : v) x = rng.uniform(-2, 2) / 3.0;
            }
        save_embeddings(t, kg1, kg2, dir.str("emb"));
        EmbeddingTable back = load_embeddings(dir.str("emb"), kg1, kg2);
        for (int kg = 1; kg <= 2; ++kg)
            for (std::size_t e = 0; e < (kg == 1 ? 2u : 1u); ++e) {
                auto a = t.vec({kg, EntityId(e)});
                auto b = back.vec({kg, EntityId(e)});
                for (int i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
            }
    }
}

TEST_CASE("pair feature modes") {
    EmbeddingTable t(2, 1, 1);
    auto v1 = t.mut({1, 0});
    v1[0] = 2;
    v1[1] = 3;
    auto v2 = t.mut({2, 0});
    v2[0] = 4;
    v2[1] = 5;
    std::vector<double> out;

    pair_embedding_features(t, 0, 0, PairMode::concat, out);
    CHECK(out == std::vector<double>{2, 3, 4, 5});
    pair_embedding_features(t, 0, 0, PairMode::diff, out);
    CHECK(out == std::vector<double>{-2, -2});
    pair_embedding_features(t, 0, 0, PairMode::hadamard, out);
    CHECK(out == std::vector<double>{8, 15});
}

TEST_CASE("diff of an entity with itself is zero") {
    EmbeddingTable t(3, 1, 1);
    auto a = t.mut({1, 0});
    auto b = t.mut({2, 0});
    for (int i = 0; i < 3; ++i) a[i] = b[i] = 0.5 * (i + 1);
    std::vector<double> out;
    pair_embedding_features(t, 0, 0, PairMode::diff, out);
    CHECK(out == std::vector<double>{0, 0, 0});
}

TEST_CASE("hits@k on identity embeddings") {
    const std::size_t n = 12;
    EmbeddingTable t(4, n, n);
    Rng rng(14);
    for (std::size_t e = 0; e < n; ++e) {
        auto v1 = t.mut({1, EntityId(e)});
        auto v2 = t.mut({2, EntityId(e)});
        for (int i = 0; i < 4; ++i) v1[i] = v2[i] = rng.uniform(-1, 1);
    }
    AlignmentSet eval(AlignRole::test);
    for (std::size_t e = 0; e < n; ++e) eval.add({EntityId(e), EntityId(e)});
    CHECK(nn_hits(t, eval, 1) == 1.0);
    CHECK(nn_hits(t, eval, int(n)) == 1.0);
    CHECK_THROWS_AS(nn_hits(t, eval, 0), Error);
    AlignmentSet empty(AlignRole::test);
    CHECK_THROWS_AS(nn_hits(t, empty, 1), Error);
}

TEST_CASE("hits@1 on random embeddings is near 1/|E2|") {
    const std::size_t n = 40;
    const int trials = 50;
    Rng rng(2029);
    double total = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        EmbeddingTable t(3, n, n);
        for (int kg = 1; kg <= 2; ++kg)
            for (std::size_t e = 0; e < n; ++e) {
                auto v = t.mut({kg, EntityId(e)});
                for (int i = 0; i < 3; ++i) v[i] = rng.uniform(-1, 1);
            }
        AlignmentSet eval(AlignRole::test);
        for (std::size_t e = 0; e < n; ++e) eval.add({EntityId(e), EntityId(e)});
        total += nn_hits(t, eval, 1);
    }
    const double mean = total / trials;
    const double expected = 1.0 / double(n);
    // 2000 Bernoulli draws; allow four standard errors
    const double se = std::sqrt(expected * (1 - expected) / double(n * trials));
    CHECK(std::abs(mean - expected) <= 4 * se);
}
