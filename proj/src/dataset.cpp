// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <unordered_set>

#include "common.hpp"
#include "csv.hpp"
#include "rng.hpp"

namespace eager {

FoldArray split_folds(const AlignmentSet& gold, uint64_t seed) {
    const std::size_t n = gold.size();
    if (n < 10) throw Error::invalid("fold splitting needs at least 10 gold pairs, got ", n);

    const auto n_train = std::size_t(std::llround(0.2 * double(n)));
    const auto n_valid = std::size_t(std::llround(0.1 * double(n)));

    FoldArray folds;
    for (std::size_t f = 0; f < kFoldCount; ++f) {
        std::vector<AlignmentPair> pairs = gold.pairs();
        Rng rng(derive_seed(seed, 0x0F01D + f));
        rng.shuffle(pairs);
        Fold& fold = folds[f];
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_train) fold.train.add(pairs[i]);
            else if (i < n_train + n_valid) fold.validation.add(pairs[i]);
            else fold.test.add(pairs[i]);
        }
    }
    return folds;
}

std::vector<LabeledPair> sample_negatives(const std::vector<AlignmentPair>& positives,
                                          const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                                          const AlignmentSet& forbidden, double ratio, uint64_t seed) {
    if (positives.empty()) throw Error::invalid("negative sampling needs at least one positive pair");
    if (ratio <= 0) throw Error::invalid("negative ratio must be > 0");
    const std::size_t needed = std::size_t(std::ceil(ratio * double(positives.size())));

    std::vector<LabeledPair> out;
    out.reserve(positives.size() + needed);
    std::unordered_set<uint64_t> taken;
    auto key = [](EntityId a, EntityId b) { return (uint64_t(a) << 32) | b; };
    for (const AlignmentPair& p : positives) {
        out.push_back({p.e1, p.e2, true});
        taken.insert(key(p.e1, p.e2));
    }

    Rng rng(derive_seed(seed, 0x9E6));
    const std::size_t max_draws = 1000 * needed;
    std::size_t draws = 0, accepted = 0;
    while (accepted < needed) {
        if (draws++ >= max_draws)
            throw Error::runtime("negative sampling pool exhausted after ", max_draws, " draws (",
                                 accepted, "/", needed, " sampled)");
        const AlignmentPair& base = positives[rng.index(positives.size())];
        EntityId e1 = base.e1, e2 = base.e2;
        if (rng.coin()) e1 = EntityId(rng.index(kg1.entity_count()));
        else e2 = EntityId(rng.index(kg2.entity_count()));
        if (forbidden.contains(e1, e2)) continue;
        if (!taken.insert(key(e1, e2)).second) continue;
        out.push_back({e1, e2, false});
        ++accepted;
    }
    return out;
}

Variant variant_from_string(std::string_view s) {
    if (s == "A") return Variant::A;
    if (s == "E") return Variant::E;
    if (s == "AE" || s == "A||E") return Variant::AE;
    throw Error::invalid("unknown feature variant '", std::string(s), "' (expected A, E or AE)");
}

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::A: return "A";
        case Variant::E: return "E";
        case Variant::AE: return "AE";
    }
    return "?";
}

FeatureMatrix assemble_features(std::span<const LabeledPair> pairs, Variant variant,
                                const std::vector<std::string>& profiles1,
                                const std::vector<std::string>& profiles2, const EmbeddingTable* table,
                                PairMode mode, GjMatching matching) {
    if (variant != Variant::A && table == nullptr)
        throw Error::invalid("variant ", to_string(variant), " requires an embedding table");

    const std::size_t attr_dim = variant == Variant::E ? 0 : 3;
    const std::size_t emb_dim = variant == Variant::A ? 0 : pair_feature_dim(table->dim(), mode);

    FeatureMatrix m;
    m.variant = variant;
    m.feature_dim = attr_dim + emb_dim;
    m.row_count = pairs.size();
    m.values.resize(m.row_count * m.feature_dim);
    m.labels.resize(m.row_count);

    parallel_for(pairs.size(), [&](std::size_t i) {
        const LabeledPair& p = pairs[i];
        m.labels[i] = p.match ? 1 : 0;
        auto row = m.row(i);
        if (attr_dim) {
            if (p.e1 >= profiles1.size() || p.e2 >= profiles2.size())
                throw Error::invalid("pair references an entity without a profile");
            SimVector sims = attr_feature_vector(profiles1[p.e1], profiles2[p.e2], matching);
            row[0] = sims.lev;
            row[1] = sims.gjac;
            row[2] = sims.dice;
        }
        if (emb_dim) {
            std::vector<double> emb;
            pair_embedding_features(*table, p.e1, p.e2, mode, emb);
            std::copy(emb.begin(), emb.end(), row.begin() + attr_dim);
        }
    });
    return m;
}

void write_feature_csv(const FeatureMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::io("cannot write feature CSV: ", path);
    for (std::size_t j = 0; j < m.feature_dim; ++j) out << 'f' << j << ',';
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < m.row_count; ++i) {
        auto row = m.row(i);
        for (std::size_t j = 0; j < m.feature_dim; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            out << buf << ',';
        }
        out << m.labels[i] << '\n';
    }
    if (!out) throw Error::io("failed writing feature CSV: ", path);
}

FeatureMatrix read_feature_csv(const std::string& path) {
    CsvTable csv = read_csv(path);
    if (csv.header.empty() || csv.header.back() != "label")
        throw Error::invalid(path, ": last column must be 'label'");
    FeatureMatrix m;
    m.feature_dim = csv.header.size() - 1;
    m.row_count = csv.rows.size();
    m.values.resize(m.row_count * m.feature_dim);
    m.labels.resize(m.row_count);
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        for (std::size_t j = 0; j < m.feature_dim; ++j) {
            char* end = nullptr;
            m.values[i * m.feature_dim + j] = std::strtod(row[j].c_str(), &end);
            if (end == row[j].c_str() || *end != '\0')
                throw Error::invalid(path, ": row ", i + 2, ": malformed feature value '", row[j], "'");
            if (!std::isfinite(m.values[i * m.feature_dim + j]))
                throw Error::invalid(path, ": row ", i + 2, ": non-finite feature value");
        }
        const std::string& label = row.back();
        if (label == "0") m.labels[i] = 0;
        else if (label == "1") m.labels[i] = 1;
        else throw Error::invalid(path, ": row ", i + 2, ": label must be 0 or 1, got '", label, "'");
    }
    // The variant cannot be recovered from a CSV; dimension 3 is A by
    // convention, anything else is treated as a plain matrix.
    m.variant = m.feature_dim == 3 ? Variant::A : Variant::AE;
    return m;
}

}  // namespace eager
