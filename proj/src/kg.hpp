// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace eager {

using EntityId = uint32_t;
using PropId = uint32_t;
using LiteralId = uint32_t;

struct KgStats {
    std::size_t entities = 0;
    std::size_t relations = 0;
    std::size_t attributes = 0;
    std::size_t rel_triples = 0;
    std::size_t attr_triples = 0;
    bool operator==(const KgStats&) const = default;
};

struct RelTriple {
    EntityId head;
    PropId rel;
    EntityId tail;
    bool operator==(const RelTriple&) const = default;
};

struct AttrTriple {
    EntityId entity;
    PropId attr;
    LiteralId value;
    bool operator==(const AttrTriple&) const = default;
};

// In-memory knowledge graph: interned entities, relation / attribute
// properties, a literal pool, and duplicate-free triple stores. Relation and
// attribute namespaces are independent, so the same IRI may be interned as
// both a relation and an attribute.
//
// Construction is single-writer. Once built the graph is immutable by
// convention and safe to share across reader threads.
class KnowledgeGraph {
public:
    // Interning is idempotent and yields dense ids, stable for the lifetime
    // of the graph. IRIs are trimmed and NFC-normalized before comparison;
    // an IRI empty after trimming is rejected.
    EntityId intern_entity(std::string_view iri);
    PropId intern_relation(std::string_view iri);
    PropId intern_attribute(std::string_view iri);
    // Literals are stored verbatim; any normalization is a concern of the
    // similarity layer.
    LiteralId intern_literal(std::string_view value);

    std::optional<EntityId> find_entity(std::string_view iri) const;

    // Return false when the triple is already present.
    bool add_rel_triple(EntityId head, PropId rel, EntityId tail);
    bool add_attr_triple(EntityId entity, PropId attr, LiteralId value);
    bool add_rel_triple(std::string_view head, std::string_view rel, std::string_view tail);
    bool add_attr_triple(std::string_view entity, std::string_view attr, std::string_view value);

    const std::string& entity_iri(EntityId id) const;
    const std::string& relation_iri(PropId id) const;
    const std::string& attribute_iri(PropId id) const;
    const std::string& literal(LiteralId id) const;

    bool has_entity(EntityId id) const { return id < entity_iris_.size(); }
    std::size_t entity_count() const { return entity_iris_.size(); }

    const std::vector<RelTriple>& rel_triples() const { return rel_triples_; }
    const std::vector<AttrTriple>& attr_triples() const { return attr_triples_; }
    // Attribute triples of one entity, in insertion order.
    const std::vector<AttrTriple>& attrs_of(EntityId id) const;

    KgStats stats() const;

private:
    struct TripleHash {
        std::size_t operator()(const RelTriple& t) const {
            uint64_t x = (uint64_t(t.head) << 32) ^ (uint64_t(t.rel) << 16) ^ t.tail;
            x ^= x >> 33; x *= 0xff51afd7ed558ccdULL; x ^= x >> 33;
            return std::size_t(x);
        }
        std::size_t operator()(const AttrTriple& t) const {
            uint64_t x = (uint64_t(t.entity) << 32) ^ (uint64_t(t.attr) << 16) ^ t.value;
            x ^= x >> 33; x *= 0xc4ceb9fe1a85ec53ULL; x ^= x >> 33;
            return std::size_t(x);
        }
    };

    static uint32_t intern_in(std::vector<std::string>& names,
                              std::unordered_map<std::string, uint32_t>& index, std::string key);

    std::vector<std::string> entity_iris_, relation_iris_, attribute_iris_, literals_;
    std::unordered_map<std::string, uint32_t> entity_index_, relation_index_, attribute_index_, literal_index_;
    std::vector<RelTriple> rel_triples_;
    std::vector<AttrTriple> attr_triples_;
    std::unordered_set<RelTriple, TripleHash> rel_seen_;
    std::unordered_set<AttrTriple, TripleHash> attr_seen_;
    std::vector<std::vector<AttrTriple>> attrs_by_entity_;
};

struct AlignmentPair {
    EntityId e1;  // entity in KG1
    EntityId e2;  // entity in KG2
    bool operator==(const AlignmentPair&) const = default;
};

enum class AlignRole { gold, train, validation, test };

std::string_view to_string(AlignRole role);

// Deduplicated set of cross-KG entity pairs with a role tag. Pair order is
// insertion order, which makes downstream sampling deterministic.
class AlignmentSet {
public:
    AlignmentSet() = default;
    explicit AlignmentSet(AlignRole role) : role_(role) {}

    bool add(AlignmentPair p) {
        if (!index_.insert(key(p)).second) return false;
        pairs_.push_back(p);
        return true;
    }
    bool contains(AlignmentPair p) const { return index_.count(key(p)) != 0; }
    bool contains(EntityId e1, EntityId e2) const { return contains({e1, e2}); }

    const std::vector<AlignmentPair>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }
    AlignRole role() const { return role_; }
    void set_role(AlignRole role) { role_ = role; }

private:
    static uint64_t key(AlignmentPair p) { return (uint64_t(p.e1) << 32) | p.e2; }
    AlignRole role_ = AlignRole::gold;
    std::vector<AlignmentPair> pairs_;
    std::unordered_set<uint64_t> index_;
};

// Entity reference across the two graphs of a matching task.
struct EntityRef {
    int kg_index;  // 1 or 2
    EntityId id;
    bool operator==(const EntityRef&) const = default;
};

}  // namespace eager
