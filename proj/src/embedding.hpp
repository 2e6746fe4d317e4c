// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kg.hpp"

namespace eager {

// Translational embedding trainer configuration. Defaults follow the common
// convention for this model family; the seed fixes every random draw.
struct TransEConfig {
    int dim = 100;
    double margin = 1.0;
    double learning_rate = 0.01;
    int epochs = 500;
    int negatives_per_positive = 1;
    enum class Norm { L1, L2 } norm = Norm::L2;
    uint64_t seed = 0;

    void validate() const;
};

// Result of collapsing two graphs into one, with seed-aligned entity pairs
// fused into a single node. Relation namespaces stay disjoint per source
// graph. Maps are dense: kgN_to_merged[id] is the merged node of entity id.
struct MergedGraph {
    std::size_t entity_count = 0;
    std::size_t relation_count = 0;
    std::vector<RelTriple> triples;
    std::vector<uint32_t> kg1_to_merged;
    std::vector<uint32_t> kg2_to_merged;
};

MergedGraph merge_graphs(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2, const AlignmentSet& seed);

// Shared-space entity vectors for both graphs. Vectors are stored per source
// graph; entities fused during training carry identical values on both sides.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(int dim, std::size_t n1, std::size_t n2)
        : dim_(dim), kg1_(std::size_t(dim) * n1), kg2_(std::size_t(dim) * n2), n1_(n1), n2_(n2) {}

    int dim() const { return dim_; }
    std::size_t size1() const { return n1_; }
    std::size_t size2() const { return n2_; }

    std::span<const double> vec(EntityRef ref) const;
    std::span<double> mut(EntityRef ref);

private:
    int dim_ = 0;
    std::vector<double> kg1_, kg2_;
    std::size_t n1_ = 0, n2_ = 0;
};

struct TransEResult {
    EmbeddingTable table;
    double initial_mean_loss = 0.0;            // margin loss before any update
    std::vector<double> epoch_mean_loss;       // observed during each epoch
    double final_mean_loss = 0.0;              // evaluation pass after training
    double max_norm_deviation = 0.0;           // max | ||v|| - 1 | seen at epoch ends
};

// Margin-ranking SGD on the merged graph, uniform single-side corruption,
// entity vectors projected to unit norm at the end of every epoch.
// Single-threaded and bit-deterministic for a fixed seed. Requires at least
// one relation triple.
TransEResult train_transe(const MergedGraph& graph, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                          const TransEConfig& cfg);

// Margin loss and its analytic gradient for one (positive, corrupted) triple
// pair; exposed for the finite-difference check. Parameters are laid out as
// [head | rel | tail | neg_head | neg_tail], each of length dim.
double transe_pair_loss(std::span<const double> params, int dim, double margin, TransEConfig::Norm norm);
void transe_pair_grad(std::span<const double> params, int dim, double margin, TransEConfig::Norm norm,
                      std::span<double> grad_out);

// Embedding file interop. Format: a "dim=<d>" header line, then one line per
// entity: "<kg_index>\t<iri>\t<v1> <v2> ... <vd>". UTF-8 throughout.
EmbeddingTable load_embeddings(const std::string& path, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2);
void save_embeddings(const EmbeddingTable& table, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                     const std::string& path);

enum class PairMode { concat, diff, hadamard };

PairMode pair_mode_from_string(std::string_view s);
std::string_view to_string(PairMode mode);

std::size_t pair_feature_dim(int dim, PairMode mode);

// Feature vector for an entity pair: [phi(e1); phi(e2)], phi(e1)-phi(e2), or
// the elementwise product.
void pair_embedding_features(const EmbeddingTable& table, EntityId e1, EntityId e2, PairMode mode,
                             std::vector<double>& out);

// Fraction of left-side entities whose gold counterpart is among the k
// nearest right-graph entities by Euclidean distance (exhaustive search).
double nn_hits(const EmbeddingTable& table, const AlignmentSet& eval, int k);

}  // namespace eager
