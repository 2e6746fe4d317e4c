// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kg.hpp"

namespace eager {

// The three attribute-profile similarity features. Each component is in [0,1].
struct SimVector {
    double lev;
    double gjac;
    double dice;
};

// How generalized Jaccard pairs up tokens: greedy descending-similarity
// matching (default) or an optimal max-weight assignment.
enum class GjMatching { greedy, optimal };

// Concatenated attribute profile of one entity: attribute values sorted by
// (attribute IRI, value), lowercased, NFC-normalized, joined with single
// spaces. Deterministic regardless of triple insertion order. Entities
// without attribute triples yield "".
std::string build_profile_text(const KnowledgeGraph& kg, EntityId entity);

// Profiles for every entity of a graph, indexed by entity id.
std::vector<std::string> build_profiles(const KnowledgeGraph& kg);

// Unit-cost edit distance over Unicode scalar values.
std::size_t levenshtein_distance(const std::u32string& a, const std::u32string& b);

// 1 - D(a,b) / max(|a|,|b|); 1 when both strings are empty.
double levenshtein_sim(std::string_view a, std::string_view b);

// Dice coefficient over multisets of character trigrams (no padding). Strings
// shorter than 3 contribute themselves as a single gram; two empty strings
// compare as 1.
double trigram_dice_sim(std::string_view a, std::string_view b);

// Maximal runs of Unicode alphanumeric characters, in order.
std::vector<std::u32string> alnum_tokenize(std::string_view s);

// Jaro similarity over Unicode scalar values (inner measure of generalized
// Jaccard).
double jaro_sim(const std::u32string& a, const std::u32string& b);

// Generalized Jaccard over alphanumeric tokens with Jaro as the inner
// similarity: match token pairs with inner sim >= 0.5, each token used at
// most once, and return (sum of matched sims) / (|X| + |Y| - #matched).
// Greedy matching takes pairs in descending (sim, left index, right index)
// order; optimal matching maximizes the total matched similarity. Both token
// lists empty -> 1, exactly one empty -> 0.
double generalized_jaccard_sim(std::string_view a, std::string_view b,
                               GjMatching matching = GjMatching::greedy);

// All three measures applied to a pair of profile texts.
SimVector attr_feature_vector(std::string_view profile1, std::string_view profile2,
                              GjMatching matching = GjMatching::greedy);

}  // namespace eager
