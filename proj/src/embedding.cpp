// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "common.hpp"
#include "rng.hpp"
#include "unicode.hpp"

namespace eager {

void TransEConfig::validate() const {
    if (dim < 1) throw Error::invalid("embedding dim must be >= 1, got ", dim);
    if (margin <= 0) throw Error::invalid("margin must be > 0");
    if (learning_rate <= 0) throw Error::invalid("learning rate must be > 0");
    if (epochs < 0) throw Error::invalid("epochs must be >= 0");
    if (negatives_per_positive < 1) throw Error::invalid("negatives per positive must be >= 1");
}

namespace {

struct UnionFind {
    std::vector<uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    uint32_t find(uint32_t x) {
        while (parent[x] != x) { parent[x] = parent[parent[x]]; x = parent[x]; }
        return x;
    }
    void unite(uint32_t a, uint32_t b) {
        a = find(a); b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

MergedGraph merge_graphs(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2, const AlignmentSet& seed) {
    const std::size_t n1 = kg1.entity_count(), n2 = kg2.entity_count();
    UnionFind uf(n1 + n2);
    for (const AlignmentPair& p : seed.pairs()) {
        if (!kg1.has_entity(p.e1) || !kg2.has_entity(p.e2))
            throw Error::invalid("seed pair references an unknown entity (", p.e1, ", ", p.e2, ")");
        uf.unite(p.e1, uint32_t(n1) + p.e2);
    }

    MergedGraph out;
    out.kg1_to_merged.resize(n1);
    out.kg2_to_merged.resize(n2);
    std::vector<uint32_t> root_to_merged(n1 + n2, UINT32_MAX);
    uint32_t next = 0;
    for (std::size_t i = 0; i < n1 + n2; ++i) {
        uint32_t root = uf.find(uint32_t(i));
        if (root_to_merged[root] == UINT32_MAX) root_to_merged[root] = next++;
        uint32_t merged = root_to_merged[root];
        if (i < n1) out.kg1_to_merged[i] = merged;
        else out.kg2_to_merged[i - n1] = merged;
    }
    out.entity_count = next;
    out.relation_count = kg1.stats().relations + kg2.stats().relations;

    std::unordered_set<uint64_t> seen;
    auto push = [&](uint32_t h, uint32_t r, uint32_t t) {
        uint64_t key = (uint64_t(h) * 0x1000003ULL + r) * 0x1000003ULL + t;
        if (seen.insert(key).second) out.triples.push_back({h, r, t});
    };
    for (const RelTriple& t : kg1.rel_triples()) push(out.kg1_to_merged[t.head], t.rel, out.kg1_to_merged[t.tail]);
    const uint32_t rel_offset = uint32_t(kg1.stats().relations);
    for (const RelTriple& t : kg2.rel_triples())
        push(out.kg2_to_merged[t.head], t.rel + rel_offset, out.kg2_to_merged[t.tail]);
    return out;
}

std::span<const double> EmbeddingTable::vec(EntityRef ref) const {
    const std::vector<double>& store = ref.kg_index == 1 ? kg1_ : kg2_;
    std::size_t n = ref.kg_index == 1 ? n1_ : n2_;
    if (ref.kg_index != 1 && ref.kg_index != 2) throw Error::invalid("kg_index must be 1 or 2");
    if (ref.id >= n) throw Error::invalid("no embedding for entity ", ref.id, " of KG", ref.kg_index);
    return {store.data() + std::size_t(ref.id) * dim_, std::size_t(dim_)};
}

std::span<double> EmbeddingTable::mut(EntityRef ref) {
    auto view = static_cast<const EmbeddingTable*>(this)->vec(ref);
    return {const_cast<double*>(view.data()), view.size()};
}

namespace {

double distance(const double* delta, int dim, TransEConfig::Norm norm) {
    double acc = 0.0;
    if (norm == TransEConfig::Norm::L1) {
        for (int i = 0; i < dim; ++i) acc += std::abs(delta[i]);
        return acc;
    }
    for (int i = 0; i < dim; ++i) acc += delta[i] * delta[i];
    return std::sqrt(acc);
}

// d(distance)/d(delta): sign(delta) for L1, delta/||delta|| for L2.
void distance_grad(const double* delta, int dim, TransEConfig::Norm norm, double* out) {
    if (norm == TransEConfig::Norm::L1) {
        for (int i = 0; i < dim; ++i) out[i] = delta[i] > 0 ? 1.0 : (delta[i] < 0 ? -1.0 : 0.0);
        return;
    }
    double d = distance(delta, dim, norm);
    if (d == 0.0) { std::fill(out, out + dim, 0.0); return; }
    for (int i = 0; i < dim; ++i) out[i] = delta[i] / d;
}

void normalize(double* v, int dim) {
    double n = 0.0;
    for (int i = 0; i < dim; ++i) n += v[i] * v[i];
    n = std::sqrt(n);
    if (n == 0.0) { v[0] = 1.0; return; }
    for (int i = 0; i < dim; ++i) v[i] /= n;
}

}  // namespace

double transe_pair_loss(std::span<const double> params, int dim, double margin, TransEConfig::Norm norm) {
    const double* h = params.data();
    const double* r = h + dim;
    const double* t = r + dim;
    const double* nh = t + dim;
    const double* nt = nh + dim;
    std::vector<double> dp(dim), dn(dim);
    for (int i = 0; i < dim; ++i) { dp[i] = h[i] + r[i] - t[i]; dn[i] = nh[i] + r[i] - nt[i]; }
    return std::max(0.0, margin + distance(dp.data(), dim, norm) - distance(dn.data(), dim, norm));
}

void transe_pair_grad(std::span<const double> params, int dim, double margin, TransEConfig::Norm norm,
                      std::span<double> grad_out) {
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    if (transe_pair_loss(params, dim, margin, norm) <= 0.0) return;
    const double* h = params.data();
    const double* r = h + dim;
    const double* t = r + dim;
    const double* nh = t + dim;
    const double* nt = nh + dim;
    std::vector<double> dp(dim), dn(dim), gp(dim), gn(dim);
    for (int i = 0; i < dim; ++i) { dp[i] = h[i] + r[i] - t[i]; dn[i] = nh[i] + r[i] - nt[i]; }
    distance_grad(dp.data(), dim, norm, gp.data());
    distance_grad(dn.data(), dim, norm, gn.data());
    for (int i = 0; i < dim; ++i) {
        grad_out[i] = gp[i];                       // d/dh
        grad_out[dim + i] = gp[i] - gn[i];         // d/dr
        grad_out[2 * dim + i] = -gp[i];            // d/dt
        grad_out[3 * dim + i] = -gn[i];            // d/dnh
        grad_out[4 * dim + i] = gn[i];             // d/dnt
    }
}

TransEResult train_transe(const MergedGraph& graph, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                          const TransEConfig& cfg) {
    cfg.validate();
    if (graph.triples.empty()) throw Error::invalid("embedding requires relational structure");
    const int d = cfg.dim;
    const std::size_t n = graph.entity_count;

    std::vector<double> ent(n * std::size_t(d)), rel(graph.relation_count * std::size_t(d));
    Rng init_rng(derive_seed(cfg.seed, 1));
    const double bound = 6.0 / std::sqrt(double(d));
    for (double& x : ent) x = init_rng.uniform(-bound, bound);
    for (double& x : rel) x = init_rng.uniform(-bound, bound);
    for (std::size_t e = 0; e < n; ++e) normalize(&ent[e * d], d);
    for (std::size_t r = 0; r < graph.relation_count; ++r) normalize(&rel[r * d], d);

    auto eval_mean_loss = [&](uint64_t stream) {
        Rng rng(derive_seed(cfg.seed, stream));
        double total = 0.0;
        for (const RelTriple& t : graph.triples) {
            bool corrupt_head = rng.coin();
            uint32_t corrupted;
            do { corrupted = uint32_t(rng.below(n)); } while (corrupted == (corrupt_head ? t.head : t.tail) && n > 1);
            std::vector<double> dp(d), dn(d);
            const double* h = &ent[t.head * std::size_t(d)];
            const double* r = &rel[t.rel * std::size_t(d)];
            const double* tl = &ent[t.tail * std::size_t(d)];
            const double* nh = corrupt_head ? &ent[corrupted * std::size_t(d)] : h;
            const double* nt = corrupt_head ? tl : &ent[corrupted * std::size_t(d)];
            for (int i = 0; i < d; ++i) { dp[i] = h[i] + r[i] - tl[i]; dn[i] = nh[i] + r[i] - nt[i]; }
            total += std::max(0.0, cfg.margin + distance(dp.data(), d, cfg.norm) - distance(dn.data(), d, cfg.norm));
        }
        return total / double(graph.triples.size());
    };

    TransEResult result;
    result.initial_mean_loss = eval_mean_loss(2);

    Rng rng(derive_seed(cfg.seed, 3));
    std::vector<std::size_t> order(graph.triples.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> dp(d), dn(d), gp(d), gn(d);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t samples = 0;
        for (std::size_t idx : order) {
            const RelTriple& t = graph.triples[idx];
            for (int k = 0; k < cfg.negatives_per_positive; ++k) {
                bool corrupt_head = rng.coin();
                uint32_t corrupted;
                do {
                    corrupted = uint32_t(rng.below(n));
                } while (corrupted == (corrupt_head ? t.head : t.tail) && n > 1);
                double* h = &ent[t.head * std::size_t(d)];
                double* r = &rel[t.rel * std::size_t(d)];
                double* tl = &ent[t.tail * std::size_t(d)];
                double* nh = corrupt_head ? &ent[corrupted * std::size_t(d)] : h;
                double* nt = corrupt_head ? tl : &ent[corrupted * std::size_t(d)];
                for (int i = 0; i < d; ++i) { dp[i] = h[i] + r[i] - tl[i]; dn[i] = nh[i] + r[i] - nt[i]; }
                double loss = cfg.margin + distance(dp.data(), d, cfg.norm) - distance(dn.data(), d, cfg.norm);
                ++samples;
                if (loss <= 0.0) continue;
                epoch_loss += loss;
                if (!std::isfinite(loss)) throw Error::runtime("non-finite embedding loss at epoch ", epoch);
                distance_grad(dp.data(), d, cfg.norm, gp.data());
                distance_grad(dn.data(), d, cfg.norm, gn.data());
                const double lr = cfg.learning_rate;
                // Gradients are fully computed above, so aliasing between the
                // positive and corrupted triple is safe here.
                for (int i = 0; i < d; ++i) {
                    h[i] -= lr * gp[i];
                    tl[i] += lr * gp[i];
                    r[i] -= lr * (gp[i] - gn[i]);
                    nh[i] += lr * gn[i];
                    nt[i] -= lr * gn[i];
                }
            }
        }
        for (std::size_t e = 0; e < n; ++e) normalize(&ent[e * d], d);
        double dev = 0.0;
        for (std::size_t e = 0; e < n; ++e) {
            double norm2 = 0.0;
            for (int i = 0; i < d; ++i) norm2 += ent[e * d + i] * ent[e * d + i];
            dev = std::max(dev, std::abs(std::sqrt(norm2) - 1.0));
        }
        result.max_norm_deviation = std::max(result.max_norm_deviation, dev);
        result.epoch_mean_loss.push_back(samples ? epoch_loss / double(samples) : 0.0);
    }

    result.final_mean_loss = eval_mean_loss(4);

    EmbeddingTable table(d, kg1.entity_count(), kg2.entity_count());
    for (std::size_t e = 0; e < kg1.entity_count(); ++e) {
        auto dst = table.mut({1, EntityId(e)});
        const double* src = &ent[graph.kg1_to_merged[e] * std::size_t(d)];
        std::copy(src, src + d, dst.begin());
    }
    for (std::size_t e = 0; e < kg2.entity_count(); ++e) {
        auto dst = table.mut({2, EntityId(e)});
        const double* src = &ent[graph.kg2_to_merged[e] * std::size_t(d)];
        std::copy(src, src + d, dst.begin());
    }
    result.table = std::move(table);
    return result;
}

EmbeddingTable load_embeddings(const std::string& path, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::io("cannot open embedding file: ", path);
    std::string line;
    if (!std::getline(in, line)) throw Error::invalid(path, ": empty embedding file");
    if (line.rfind("dim=", 0) != 0) throw Error::invalid(path, ":1: expected a dim=<d> header");
    int dim = 0;
    try {
        dim = std::stoi(line.substr(4));
    } catch (const std::exception&) {
        throw Error::invalid(path, ":1: malformed dim header: ", line);
    }
    if (dim < 1) throw Error::invalid(path, ":1: dim must be >= 1");

    EmbeddingTable table(dim, kg1.entity_count(), kg2.entity_count());
    std::vector<char> covered1(kg1.entity_count(), 0), covered2(kg2.entity_count(), 0);
    std::vector<std::string> unknown;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab1 = line.find('\t');
        std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos)
            throw Error::invalid(path, ":", lineno, ": expected <kg>\\t<iri>\\t<values>");
        std::string kg_field = line.substr(0, tab1);
        std::string iri = line.substr(tab1 + 1, tab2 - tab1 - 1);
        if (kg_field != "1" && kg_field != "2")
            throw Error::invalid(path, ":", lineno, ": kg_index must be 1 or 2, got '", kg_field, "'");
        int kg_index = kg_field == "1" ? 1 : 2;

        const KnowledgeGraph& kg = kg_index == 1 ? kg1 : kg2;
        auto id = kg.find_entity(iri);
        if (!id) {
            unknown.push_back(Error::cat("KG", kg_index, ":", iri));
            continue;
        }

        auto dst = table.mut({kg_index, *id});
        const char* p = line.c_str() + tab2 + 1;
        int count = 0;
        while (*p) {
            while (*p == ' ') ++p;
            if (!*p) break;
            char* end = nullptr;
            double v = std::strtod(p, &end);
            if (end == p) throw Error::invalid(path, ":", lineno, ": malformed vector entry");
            if (!std::isfinite(v)) throw Error::invalid(path, ":", lineno, ": non-finite vector entry");
            if (count >= dim) throw Error::invalid(path, ":", lineno, ": expected ", dim, " values, found more");
            dst[count++] = v;
            p = end;
        }
        if (count != dim)
            throw Error::invalid(path, ":", lineno, ": expected ", dim, " values, found ", count);
        (kg_index == 1 ? covered1 : covered2)[*id] = 1;
    }
    if (!unknown.empty()) {
        std::string msg = "embedding file names entities absent from the graphs:";
        for (std::size_t i = 0; i < unknown.size() && i < 10; ++i) msg += " " + unknown[i];
        if (unknown.size() > 10) msg += Error::cat(" (and ", unknown.size() - 10, " more)");
        throw Error::invalid(msg);
    }
    std::vector<std::string> missing;
    for (std::size_t e = 0; e < covered1.size(); ++e)
        if (!covered1[e]) missing.push_back("KG1:" + kg1.entity_iri(EntityId(e)));
    for (std::size_t e = 0; e < covered2.size(); ++e)
        if (!covered2[e]) missing.push_back("KG2:" + kg2.entity_iri(EntityId(e)));
    if (!missing.empty()) {
        std::string msg = "embedding file misses entities:";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
        if (missing.size() > 10) msg += Error::cat(" (and ", missing.size() - 10, " more)");
        throw Error::invalid(msg);
    }
    return table;
}

void save_embeddings(const EmbeddingTable& table, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::io("cannot write embedding file: ", path);
    out << "dim=" << table.dim() << "\n";
    char buf[32];
    auto write_side = [&](int kg_index, const KnowledgeGraph& kg) {
        for (std::size_t e = 0; e < kg.entity_count(); ++e) {
            out << kg_index << '\t' << kg.entity_iri(EntityId(e)) << '\t';
            auto v = table.vec({kg_index, EntityId(e)});
            for (int i = 0; i < table.dim(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", v[i]);
                if (i) out << ' ';
                out << buf;
            }
            out << '\n';
        }
    };
    write_side(1, kg1);
    write_side(2, kg2);
    if (!out) throw Error::io("failed writing embedding file: ", path);
}

PairMode pair_mode_from_string(std::string_view s) {
    if (s == "concat") return PairMode::concat;
    if (s == "diff") return PairMode::diff;
    if (s == "hadamard") return PairMode::hadamard;
    throw Error::invalid("unknown pair mode '", std::string(s), "' (expected concat, diff or hadamard)");
}

std::string_view to_string(PairMode mode) {
    switch (mode) {
        case PairMode::concat: return "concat";
        case PairMode::diff: return "diff";
        case PairMode::hadamard: return "hadamard";
    }
    return "?";
}

std::size_t pair_feature_dim(int dim, PairMode mode) {
    return mode == PairMode::concat ? std::size_t(dim) * 2 : std::size_t(dim);
}

void pair_embedding_features(const EmbeddingTable& table, EntityId e1, EntityId e2, PairMode mode,
                             std::vector<double>& out) {
    auto v1 = table.vec({1, e1});
    auto v2 = table.vec({2, e2});
    const int d = table.dim();
    out.resize(pair_feature_dim(d, mode));
    switch (mode) {
        case PairMode::concat:
            std::copy(v1.begin(), v1.end(), out.begin());
            std::copy(v2.begin(), v2.end(), out.begin() + d);
            break;
        case PairMode::diff:
            for (int i = 0; i < d; ++i) out[i] = v1[i] - v2[i];
            break;
        case PairMode::hadamard:
            for (int i = 0; i < d; ++i) out[i] = v1[i] * v2[i];
            break;
    }
}

double nn_hits(const EmbeddingTable& table, const AlignmentSet& eval, int k) {
    if (k < 1) throw Error::invalid("k must be >= 1");
    if (eval.empty()) throw Error::invalid("hits@k needs a nonempty evaluation set");
    const int d = table.dim();
    std::size_t hits = 0;
    for (const AlignmentPair& p : eval.pairs()) {
        auto left = table.vec({1, p.e1});
        auto gold = table.vec({2, p.e2});
        double gold_dist = 0.0;
        for (int i = 0; i < d; ++i) { double diff = left[i] - gold[i]; gold_dist += diff * diff; }
        std::size_t closer = 0;
        for (std::size_t e = 0; e < table.size2(); ++e) {
            if (EntityId(e) == p.e2) continue;
            auto cand = table.vec({2, EntityId(e)});
            double dist = 0.0;
            for (int i = 0; i < d; ++i) { double diff = left[i] - cand[i]; dist += diff * diff; }
            if (dist < gold_dist) ++closer;
        }
        if (closer < std::size_t(k)) ++hits;
    }
    return double(hits) / double(eval.size());
}

}  // namespace eager
