// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embedding.hpp"
#include "kg.hpp"
#include "strsim.hpp"

namespace eager {

// One cross-validation fold: a disjoint partition of the gold alignment into
// 20% train / 10% validation / 70% test.
struct Fold {
    AlignmentSet train{AlignRole::train};
    AlignmentSet validation{AlignRole::validation};
    AlignmentSet test{AlignRole::test};
};

inline constexpr std::size_t kFoldCount = 5;
using FoldArray = std::array<Fold, kFoldCount>;

// Five independent 7-2-1 splits of the gold alignment. Deterministic for a
// fixed seed; requires |gold| >= 10 so every part is nonempty.
FoldArray split_folds(const AlignmentSet& gold, uint64_t seed);

struct LabeledPair {
    EntityId e1;  // KG1 side
    EntityId e2;  // KG2 side
    bool match;
};

// positives labeled match followed by ceil(ratio * |positives|) sampled
// non-match pairs: a random positive has one side (chosen uniformly) replaced
// by a uniform random entity of that side's graph. Rejects pairs found in
// `forbidden` or duplicating a positive/earlier negative; errors out after
// 1000 * needed failed draws.
std::vector<LabeledPair> sample_negatives(const std::vector<AlignmentPair>& positives,
                                          const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                                          const AlignmentSet& forbidden, double ratio, uint64_t seed);

enum class Variant { A, E, AE };

Variant variant_from_string(std::string_view s);
std::string_view to_string(Variant v);

// Row-major labeled feature matrix for one of the three feature variants.
struct FeatureMatrix {
    Variant variant = Variant::A;
    std::size_t feature_dim = 0;
    std::size_t row_count = 0;
    std::vector<double> values;  // row_count * feature_dim
    std::vector<int> labels;     // 0 = non-match, 1 = match

    std::span<const double> row(std::size_t i) const { return {values.data() + i * feature_dim, feature_dim}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * feature_dim, feature_dim}; }
};

// Assembles feature rows in pair order: variant A = the three profile
// similarities, E = embedding pair features, AE = A followed by E. The
// embedding table is required unless variant == A.
FeatureMatrix assemble_features(std::span<const LabeledPair> pairs, Variant variant,
                                const std::vector<std::string>& profiles1,
                                const std::vector<std::string>& profiles2, const EmbeddingTable* table,
                                PairMode mode, GjMatching matching = GjMatching::greedy);

// CSV interop: header "f0,...,fN,label", labels in {0,1}. Values are written
// with round-trip precision so matrices reload bit-exactly.
void write_feature_csv(const FeatureMatrix& m, const std::string& path);
FeatureMatrix read_feature_csv(const std::string& path);

}  // namespace eager
