// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "unicode.hpp"

namespace fs = std::filesystem;

namespace eager {

namespace {

std::string escape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out.push_back(s[i]);
            continue;
        }
        switch (s[++i]) {
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case '\\': out.push_back('\\'); break;
            default: out.push_back('\\'); out.push_back(s[i]);
        }
    }
    return out;
}

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            fields.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::io("cannot open file: ", path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(line, lineno);
    }
}

}  // namespace

std::vector<RawTriple> parse_triple_file(const std::string& path, TripleKind kind) {
    (void)kind;  // both kinds share the format; the caller decides the store
    std::vector<RawTriple> triples;
    for_each_line(path, [&](const std::string& line, std::size_t lineno) {
        std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 3)
            throw Error::invalid(path, ":", lineno, ": expected 3 TAB-separated fields, got ", fields.size());
        triples.push_back({unescape_field(fields[0]), unescape_field(fields[1]), unescape_field(fields[2])});
    });
    return triples;
}

std::vector<std::pair<std::string, std::string>> parse_link_file(const std::string& path) {
    std::vector<std::pair<std::string, std::string>> links;
    for_each_line(path, [&](const std::string& line, std::size_t lineno) {
        std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 2)
            throw Error::invalid(path, ":", lineno, ": expected 2 TAB-separated fields, got ", fields.size());
        links.emplace_back(unescape_field(fields[0]), unescape_field(fields[1]));
    });
    return links;
}

AlignmentSet parse_links(const std::string& path, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2) {
    AlignmentSet set;
    for (const auto& [left, right] : parse_link_file(path)) {
        auto e1 = kg1.find_entity(left);
        auto e2 = kg2.find_entity(right);
        if (!e1 || !e2)
            throw Error::invalid(path, ": link references unknown entity: ", !e1 ? left : right);
        set.add({*e1, *e2});
    }
    return set;
}

namespace {

void require_file(const fs::path& p) {
    if (!fs::exists(p)) throw Error::invalid("missing mandatory dataset file: ", p.string());
}

void load_triples_into(const std::string& path, TripleKind kind, KnowledgeGraph& kg) {
    for (const RawTriple& t : parse_triple_file(path, kind)) {
        if (kind == TripleKind::relation) kg.add_rel_triple(t[0], t[1], t[2]);
        else kg.add_attr_triple(t[0], t[1], t[2]);
    }
}

void verify_fold_partition(const Fold& fold, const AlignmentSet& gold, const std::string& where) {
    std::unordered_set<uint64_t> seen;
    std::size_t total = 0;
    for (const AlignmentSet* part : {&fold.train, &fold.validation, &fold.test}) {
        for (const AlignmentPair& p : part->pairs()) {
            if (!gold.contains(p))
                throw Error::invalid(where, ": fold pair not present in ent_links");
            if (!seen.insert((uint64_t(p.e1) << 32) | p.e2).second)
                throw Error::invalid(where, ": fold parts overlap");
            ++total;
        }
    }
    if (total != gold.size())
        throw Error::invalid(where, ": fold parts cover ", total, " of ", gold.size(), " gold links");
}

void write_link_file(const fs::path& path, const std::vector<AlignmentPair>& pairs, const KnowledgeGraph& kg1,
                     const KnowledgeGraph& kg2, bool sorted) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::io("cannot write link file: ", path.string());
    std::vector<std::string> lines;
    lines.reserve(pairs.size());
    for (const AlignmentPair& p : pairs)
        lines.push_back(escape_field(kg1.entity_iri(p.e1)) + "\t" + escape_field(kg2.entity_iri(p.e2)));
    if (sorted) std::sort(lines.begin(), lines.end());
    for (const std::string& l : lines) out << l << '\n';
    if (!out) throw Error::io("failed writing link file: ", path.string());
}

}  // namespace

void write_folds(const std::string& dir, const FoldArray& folds, const KnowledgeGraph& kg1,
                 const KnowledgeGraph& kg2) {
    for (std::size_t f = 0; f < folds.size(); ++f) {
        fs::path fold_dir = fs::path(dir) / "721_5fold" / std::to_string(f + 1);
        fs::create_directories(fold_dir);
        write_link_file(fold_dir / "train_links", folds[f].train.pairs(), kg1, kg2, /*sorted=*/false);
        write_link_file(fold_dir / "valid_links", folds[f].validation.pairs(), kg1, kg2, /*sorted=*/false);
        write_link_file(fold_dir / "test_links", folds[f].test.pairs(), kg1, kg2, /*sorted=*/false);
    }
}

DatasetBundle load_openea_dataset(const std::string& dir, uint64_t seed) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw Error::invalid("dataset directory does not exist: ", dir);
    for (const char* name : {"rel_triples_1", "rel_triples_2", "attr_triples_1", "attr_triples_2", "ent_links"})
        require_file(root / name);

    DatasetBundle bundle;
    load_triples_into((root / "rel_triples_1").string(), TripleKind::relation, bundle.kg1);
    load_triples_into((root / "attr_triples_1").string(), TripleKind::attribute, bundle.kg1);
    load_triples_into((root / "rel_triples_2").string(), TripleKind::relation, bundle.kg2);
    load_triples_into((root / "attr_triples_2").string(), TripleKind::attribute, bundle.kg2);

    // Link endpoints may name entities that carry no triples; intern them so
    // alignment references always resolve.
    bundle.gold.set_role(AlignRole::gold);
    for (const auto& [left, right] : parse_link_file((root / "ent_links").string()))
        bundle.gold.add({bundle.kg1.intern_entity(left), bundle.kg2.intern_entity(right)});

    const fs::path fold_root = root / "721_5fold";
    bool any_fold = false, all_folds = true;
    for (std::size_t f = 1; f <= kFoldCount; ++f) {
        bool present = fs::is_directory(fold_root / std::to_string(f));
        any_fold |= present;
        all_folds &= present;
    }
    if (any_fold && !all_folds)
        throw Error::invalid(dir, ": 721_5fold must contain all ", kFoldCount, " fold directories");

    if (all_folds) {
        for (std::size_t f = 0; f < kFoldCount; ++f) {
            fs::path fd = fold_root / std::to_string(f + 1);
            for (const char* name : {"train_links", "valid_links", "test_links"}) require_file(fd / name);
            Fold& fold = bundle.folds[f];
            fold.train = parse_links((fd / "train_links").string(), bundle.kg1, bundle.kg2);
            fold.train.set_role(AlignRole::train);
            fold.validation = parse_links((fd / "valid_links").string(), bundle.kg1, bundle.kg2);
            fold.validation.set_role(AlignRole::validation);
            fold.test = parse_links((fd / "test_links").string(), bundle.kg1, bundle.kg2);
            fold.test.set_role(AlignRole::test);
            verify_fold_partition(fold, bundle.gold, fd.string());
        }
        bundle.folds_from_disk = true;
    } else if (bundle.gold.size() >= 10) {
        bundle.folds = split_folds(bundle.gold, seed);
        write_folds(dir, bundle.folds, bundle.kg1, bundle.kg2);
    }
    // Fewer than 10 gold links cannot carry the 7-2-1 protocol; the bundle
    // still loads (stats, conversion round trips) with empty folds.
    return bundle;
}

namespace {

void write_triple_file(const fs::path& path, const KnowledgeGraph& kg, TripleKind kind) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::io("cannot write triple file: ", path.string());
    std::vector<std::string> lines;
    if (kind == TripleKind::relation) {
        lines.reserve(kg.rel_triples().size());
        for (const RelTriple& t : kg.rel_triples())
            lines.push_back(escape_field(kg.entity_iri(t.head)) + "\t" + escape_field(kg.relation_iri(t.rel)) +
                            "\t" + escape_field(kg.entity_iri(t.tail)));
    } else {
        lines.reserve(kg.attr_triples().size());
        for (const AttrTriple& t : kg.attr_triples())
            lines.push_back(escape_field(kg.entity_iri(t.entity)) + "\t" + escape_field(kg.attribute_iri(t.attr)) +
                            "\t" + escape_field(kg.literal(t.value)));
    }
    std::sort(lines.begin(), lines.end());
    for (const std::string& l : lines) out << l << '\n';
    if (!out) throw Error::io("failed writing triple file: ", path.string());
}

nlohmann::json stats_json(const KgStats& s) {
    return {{"entities", s.entities},
            {"relations", s.relations},
            {"attributes", s.attributes},
            {"rel_triples", s.rel_triples},
            {"attr_triples", s.attr_triples}};
}

}  // namespace

void write_openea_dataset(const std::string& dir, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                          const AlignmentSet& gold) {
    fs::create_directories(dir);
    const fs::path root(dir);
    write_triple_file(root / "rel_triples_1", kg1, TripleKind::relation);
    write_triple_file(root / "attr_triples_1", kg1, TripleKind::attribute);
    write_triple_file(root / "rel_triples_2", kg2, TripleKind::relation);
    write_triple_file(root / "attr_triples_2", kg2, TripleKind::attribute);
    write_link_file(root / "ent_links", gold.pairs(), kg1, kg2, /*sorted=*/true);

    nlohmann::json manifest = {{"kg1", stats_json(kg1.stats())},
                               {"kg2", stats_json(kg2.stats())},
                               {"links", gold.size()}};
    std::ofstream out(root / "manifest.json", std::ios::binary);
    if (!out) throw Error::io("cannot write manifest.json in ", dir);
    out << manifest.dump(2) << '\n';
}

TabularSchema TabularSchema::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::io("cannot open schema file: ", path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text, path);
}

TabularSchema TabularSchema::from_json(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error::invalid(origin, ": malformed JSON: ", e.what());
    }
    TabularSchema schema;
    try {
        schema.id_column = j.at("id_column").get<std::string>();
        schema.entity_type = j.at("entity_type").get<std::string>();
        for (const auto& c : j.at("attribute_columns")) schema.attribute_columns.push_back(c.get<std::string>());
        if (j.contains("relation_columns"))
            for (const auto& c : j.at("relation_columns"))
                schema.relation_columns.push_back(
                    {c.at("column").get<std::string>(), c.at("target_type").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw Error::invalid(origin, ": schema structure invalid: ", e.what());
    }
    schema.validate();
    return schema;
}

void TabularSchema::validate() const {
    if (id_column.empty()) throw Error::invalid("schema: id_column must be nonempty");
    if (entity_type.empty()) throw Error::invalid("schema: entity_type must be nonempty");
    for (const std::string& c : attribute_columns)
        if (c == id_column) throw Error::invalid("schema: id column '", c, "' listed among attribute columns");
    for (const RelationColumn& c : relation_columns)
        if (c.column == id_column) throw Error::invalid("schema: id column '", c.column, "' listed among relation columns");
}

void tabular_to_kg(const CsvTable& rows, const TabularSchema& schema, KnowledgeGraph& kg) {
    schema.validate();
    const int id_col = rows.column(schema.id_column);
    if (id_col < 0) throw Error::invalid("id column '", schema.id_column, "' not found in CSV header");
    std::vector<int> attr_cols;
    for (const std::string& name : schema.attribute_columns) {
        int c = rows.column(name);
        if (c < 0) throw Error::invalid("attribute column '", name, "' not found in CSV header");
        attr_cols.push_back(c);
    }
    std::vector<int> rel_cols;
    for (const auto& rc : schema.relation_columns) {
        int c = rows.column(rc.column);
        if (c < 0) throw Error::invalid("relation column '", rc.column, "' not found in CSV header");
        rel_cols.push_back(c);
    }

    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
        const auto& row = rows.rows[r];
        const std::string& id = row[std::size_t(id_col)];
        if (std::string(trim(id)).empty())
            throw Error::invalid("row ", r + 2, ": empty value in id column '", schema.id_column, "'");
        if (!seen_ids.insert(id).second)
            throw Error::invalid("row ", r + 2, ": duplicate id '", id, "' in table of type ", schema.entity_type);
        const std::string iri = schema.entity_type + "/" + id;
        kg.intern_entity(iri);
        kg.add_attr_triple(iri, "type", schema.entity_type);
        for (std::size_t a = 0; a < attr_cols.size(); ++a) {
            const std::string& value = row[std::size_t(attr_cols[a])];
            if (value.empty()) continue;
            kg.add_attr_triple(iri, schema.attribute_columns[a], value);
        }
        for (std::size_t c = 0; c < rel_cols.size(); ++c) {
            const std::string& target = row[std::size_t(rel_cols[c])];
            if (target.empty()) continue;
            const std::string target_iri = schema.relation_columns[c].target_type + "/" + target;
            kg.add_rel_triple(iri, schema.relation_columns[c].column, target_iri);
        }
    }
}

}  // namespace eager
