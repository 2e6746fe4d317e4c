// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <string>

#include "kg.hpp"

namespace eager::testing {

// Synthetic matching benchmark: KG2 is a perturbed copy of KG1 (typos in
// attribute values, a share of relation triples dropped), with full gold
// links. Written as an OpenEA-layout directory.
struct SyntheticSpec {
    std::size_t n_entities = 500;
    double typo_prob = 0.1;   // per-character mutation probability
    double rel_drop = 0.3;    // relation triples dropped on the KG2 side
    int rels_per_entity = 3;
    uint64_t seed = 7;
};

void write_synthetic_dataset(const std::string& dir, const SyntheticSpec& spec);

// Two isomorphic directed cycles of length n (n even); even-indexed aligned
// pairs form the seed alignment, odd-indexed pairs are held out.
struct CyclePair {
    KnowledgeGraph kg1, kg2;
    AlignmentSet seed{AlignRole::train};
    AlignmentSet heldout{AlignRole::test};
};

CyclePair make_cycle_pair(std::size_t n);

}  // namespace eager::testing
