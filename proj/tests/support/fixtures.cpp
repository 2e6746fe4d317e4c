// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "fixtures.hpp"

#include <vector>

#include "ingest.hpp"
#include "rng.hpp"

namespace eager::testing {

namespace {

std::string random_word(Rng& rng, std::size_t min_len, std::size_t max_len) {
    std::size_t len = min_len + rng.index(max_len - min_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w.push_back(char('a' + rng.index(26)));
    return w;
}

// Character-level noise: substitution, deletion or insertion with equal
// probability at each position.
std::string add_typos(const std::string& s, double prob, Rng& rng) {
    std::string out;
    out.reserve(s.size() + 4);
    for (char c : s) {
        if (rng.uniform() >= prob) {
            out.push_back(c);
            continue;
        }
        switch (rng.index(3)) {
            case 0: out.push_back(char('a' + rng.index(26))); break;  // substitute
            case 1: break;                                            // delete
            default:                                                  // insert
                out.push_back(char('a' + rng.index(26)));
                out.push_back(c);
        }
    }
    return out;
}

}  // namespace

void write_synthetic_dataset(const std::string& dir, const SyntheticSpec& spec) {
    Rng rng(derive_seed(spec.seed, 0xF17));
    const std::size_t n = spec.n_entities;

    std::vector<std::string> names(n), codes(n), years(n), types(n);
    for (std::size_t i = 0; i < n; ++i) {
        names[i] = random_word(rng, 4, 8) + " " + random_word(rng, 4, 8) + " " + random_word(rng, 3, 6);
        codes[i] = random_word(rng, 3, 5) + "-" + std::to_string(1000 + rng.index(9000));
        years[i] = std::to_string(1950 + rng.index(70));
        types[i] = i % 2 == 0 ? "alpha" : "beta";
    }

    struct Edge { std::size_t from, to; int rel; };
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < spec.rels_per_entity; ++k) {
            std::size_t to = rng.index(n);
            if (to == i) to = (to + 1) % n;
            edges.push_back({i, to, int(rng.index(4))});
        }
    }

    KnowledgeGraph kg1, kg2;
    auto iri1 = [](std::size_t i) { return "a/" + std::to_string(i); };
    auto iri2 = [](std::size_t i) { return "b/" + std::to_string(i); };
    for (std::size_t i = 0; i < n; ++i) {
        kg1.add_attr_triple(iri1(i), "name", names[i]);
        kg1.add_attr_triple(iri1(i), "code", codes[i]);
        kg1.add_attr_triple(iri1(i), "year", years[i]);
        kg1.add_attr_triple(iri1(i), "type", types[i]);
        kg2.add_attr_triple(iri2(i), "name", add_typos(names[i], spec.typo_prob, rng));
        kg2.add_attr_triple(iri2(i), "code", add_typos(codes[i], spec.typo_prob, rng));
        kg2.add_attr_triple(iri2(i), "year", add_typos(years[i], spec.typo_prob, rng));
        kg2.add_attr_triple(iri2(i), "type", types[i]);
    }
    for (const Edge& e : edges) {
        const std::string rel = "rel" + std::to_string(e.rel);
        kg1.add_rel_triple(iri1(e.from), rel, iri1(e.to));
        if (rng.uniform() >= spec.rel_drop) kg2.add_rel_triple(iri2(e.from), rel, iri2(e.to));
    }

    AlignmentSet gold(AlignRole::gold);
    for (std::size_t i = 0; i < n; ++i)
        gold.add({*kg1.find_entity(iri1(i)), *kg2.find_entity(iri2(i))});

    write_openea_dataset(dir, kg1, kg2, gold);
}

CyclePair make_cycle_pair(std::size_t n) {
    CyclePair out;
    auto iri1 = [](std::size_t i) { return "c1/" + std::to_string(i); };
    auto iri2 = [](std::size_t i) { return "c2/" + std::to_string(i); };
    for (std::size_t i = 0; i < n; ++i) {
        out.kg1.add_rel_triple(iri1(i), "next1", iri1((i + 1) % n));
        out.kg2.add_rel_triple(iri2(i), "next2", iri2((i + 1) % n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        AlignmentPair pair{*out.kg1.find_entity(iri1(i)), *out.kg2.find_entity(iri2(i))};
        if (i % 2 == 0) out.seed.add(pair);
        else out.heldout.add(pair);
    }
    return out;
}

}  // namespace eager::testing
