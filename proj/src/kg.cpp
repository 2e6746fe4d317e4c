// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "kg.hpp"

#include "common.hpp"
#include "unicode.hpp"

namespace eager {

uint32_t KnowledgeGraph::intern_in(std::vector<std::string>& names,
                                   std::unordered_map<std::string, uint32_t>& index, std::string key) {
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    uint32_t id = uint32_t(names.size());
    names.push_back(key);
    index.emplace(std::move(key), id);
    return id;
}

static std::string canonical_iri(std::string_view iri) {
    std::string norm = nfc(trim(iri));
    if (norm.empty()) throw Error::invalid("cannot intern an empty IRI");
    return norm;
}

EntityId KnowledgeGraph::intern_entity(std::string_view iri) {
    EntityId id = intern_in(entity_iris_, entity_index_, canonical_iri(iri));
    if (id >= attrs_by_entity_.size()) attrs_by_entity_.resize(id + 1);
    return id;
}

PropId KnowledgeGraph::intern_relation(std::string_view iri) {
    return intern_in(relation_iris_, relation_index_, canonical_iri(iri));
}

PropId KnowledgeGraph::intern_attribute(std::string_view iri) {
    return intern_in(attribute_iris_, attribute_index_, canonical_iri(iri));
}

LiteralId KnowledgeGraph::intern_literal(std::string_view value) {
    return intern_in(literals_, literal_index_, std::string(value));
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view iri) const {
    auto it = entity_index_.find(nfc(trim(iri)));
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
}

bool KnowledgeGraph::add_rel_triple(EntityId head, PropId rel, EntityId tail) {
    if (!has_entity(head) || !has_entity(tail) || rel >= relation_iris_.size())
        throw Error::invalid("relation triple references an unknown id");
    RelTriple t{head, rel, tail};
    if (!rel_seen_.insert(t).second) return false;
    rel_triples_.push_back(t);
    return true;
}

bool KnowledgeGraph::add_attr_triple(EntityId entity, PropId attr, LiteralId value) {
    if (!has_entity(entity) || attr >= attribute_iris_.size() || value >= literals_.size())
        throw Error::invalid("attribute triple references an unknown id");
    AttrTriple t{entity, attr, value};
    if (!attr_seen_.insert(t).second) return false;
    attr_triples_.push_back(t);
    attrs_by_entity_[entity].push_back(t);
    return true;
}

bool KnowledgeGraph::add_rel_triple(std::string_view head, std::string_view rel, std::string_view tail) {
    // Interning is sequenced explicitly: id assignment must not depend on the
    // compiler's argument evaluation order.
    EntityId h = intern_entity(head);
    PropId r = intern_relation(rel);
    EntityId t = intern_entity(tail);
    return add_rel_triple(h, r, t);
}

bool KnowledgeGraph::add_attr_triple(std::string_view entity, std::string_view attr, std::string_view value) {
    EntityId e = intern_entity(entity);
    PropId a = intern_attribute(attr);
    LiteralId v = intern_literal(value);
    return add_attr_triple(e, a, v);
}

const std::string& KnowledgeGraph::entity_iri(EntityId id) const {
    if (!has_entity(id)) throw Error::invalid("unknown entity id ", id);
    return entity_iris_[id];
}

const std::string& KnowledgeGraph::relation_iri(PropId id) const {
    if (id >= relation_iris_.size()) throw Error::invalid("unknown relation id ", id);
    return relation_iris_[id];
}

const std::string& KnowledgeGraph::attribute_iri(PropId id) const {
    if (id >= attribute_iris_.size()) throw Error::invalid("unknown attribute id ", id);
    return attribute_iris_[id];
}

const std::string& KnowledgeGraph::literal(LiteralId id) const {
    if (id >= literals_.size()) throw Error::invalid("unknown literal id ", id);
    return literals_[id];
}

const std::vector<AttrTriple>& KnowledgeGraph::attrs_of(EntityId id) const {
    if (!has_entity(id)) throw Error::invalid("unknown entity id ", id);
    return attrs_by_entity_[id];
}

KgStats KnowledgeGraph::stats() const {
    return {entity_iris_.size(), relation_iris_.size(), attribute_iris_.size(), rel_triples_.size(),
            attr_triples_.size()};
}

std::string_view to_string(AlignRole role) {
    switch (role) {
        case AlignRole::gold: return "gold";
        case AlignRole::train: return "train";
        case AlignRole::validation: return "validation";
        case AlignRole::test: return "test";
    }
    return "unknown";
}

}  // namespace eager
