// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "dataset.hpp"
#include "kg.hpp"

namespace eager {

// A loaded matching task: two graphs, the gold alignment, and five 7-2-1
// folds. Immutable after construction.
struct DatasetBundle {
    KnowledgeGraph kg1, kg2;
    AlignmentSet gold{AlignRole::gold};
    FoldArray folds;
    bool folds_from_disk = false;
};

enum class TripleKind { relation, attribute };

using RawTriple = std::array<std::string, 3>;

// TAB-separated triple files, UTF-8, one triple per nonempty line. Exactly
// three fields; TABs inside values must be escaped as "\t" (backslash
// escapes: \t, \n, \\). Parse errors carry the line number.
std::vector<RawTriple> parse_triple_file(const std::string& path, TripleKind kind);

// Two TAB-separated fields per line; duplicates collapse.
AlignmentSet parse_links(const std::string& path, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2);
std::vector<std::pair<std::string, std::string>> parse_link_file(const std::string& path);

// Directory layout: rel_triples_1, rel_triples_2, attr_triples_1,
// attr_triples_2, ent_links, and 721_5fold/1..5/{train_links, valid_links,
// test_links}. When the fold directories are absent they are generated from
// `seed` and written back; when present they must partition the gold links.
DatasetBundle load_openea_dataset(const std::string& dir, uint64_t seed);

// Serialization counterpart used by the convert pipeline. Writes the five
// data files (triples and links sorted for canonical output) plus a
// manifest.json with the store cardinalities.
void write_openea_dataset(const std::string& dir, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                          const AlignmentSet& gold);

// Writes 721_5fold/<f>/{train_links,valid_links,test_links} preserving pair
// order, so a reloaded bundle reproduces the generated one exactly.
void write_folds(const std::string& dir, const FoldArray& folds, const KnowledgeGraph& kg1,
                 const KnowledgeGraph& kg2);

// Mapping from one entity table to graph fragments.
struct TabularSchema {
    struct RelationColumn {
        std::string column;
        std::string target_type;
    };
    std::string id_column;
    std::vector<std::string> attribute_columns;
    std::vector<RelationColumn> relation_columns;
    std::string entity_type;

    static TabularSchema from_json_file(const std::string& path);
    static TabularSchema from_json(const std::string& text, const std::string& origin);
    void validate() const;
};

// Converts one table into graph content: per row an entity
// "<entity_type>/<id>", one attribute triple per nonempty attribute cell, a
// "type" attribute triple, and one relation triple per nonempty relation
// cell (creating the target entity when absent). Duplicate ids are rejected.
void tabular_to_kg(const CsvTable& rows, const TabularSchema& schema, KnowledgeGraph& kg);

}  // namespace eager
